#include "fracflow/mesh.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fracflow {

std::string to_string(Subdomain s) {
  switch (s) {
    case Subdomain::M1: return "m1";
    case Subdomain::M2: return "m2";
    case Subdomain::Fracture: return "f";
  }
  return "?";
}

std::string to_string(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "?";
}

const Box& DomainLayout::box(Subdomain s) const {
  switch (s) {
    case Subdomain::M1: return m1;
    case Subdomain::M2: return m2;
    case Subdomain::Fracture:
      if (!fracture) throw std::logic_error("reduced layout has no fracture block");
      return *fracture;
  }
  throw std::logic_error("bad subdomain");
}

double DomainLayout::total_area() const {
  return m1.area() + m2.area() + (fracture ? fracture->area() : 0.0);
}

DomainLayout build_geometry(const ScalingRegime& regime, double matrix_width) {
  const double eps = regime.epsilon;
  if (!(eps >= 0.0)) throw std::invalid_argument("build_geometry: epsilon must be non-negative");
  if (!(matrix_width > 0.0)) throw std::invalid_argument("build_geometry: matrix width must be positive");
  DomainLayout l;
  l.epsilon = eps;
  const double h = 0.5 * eps;
  l.m1 = {-matrix_width - h, -h, 0.0, 1.0};
  l.m2 = {h, matrix_width + h, 0.0, 1.0};
  if (eps > 0.0) l.fracture = Box{-h, h, 0.0, 1.0};
  l.gamma1_x = -h;
  l.gamma2_x = h;
  return l;
}

// ---------------------------------------------------------------------------

Grid::Grid(DomainLayout layout, GridResolution res) : layout_(std::move(layout)), res_(res) {
  if (res_.matrix_ny < 1) throw std::invalid_argument("build_grid: ny must be at least 1");
  if (res_.matrix_nx < 1) throw std::invalid_argument("build_grid: matrix nx must be at least 1");
  if (!layout_.reduced() && res_.fracture_nx < 1)
    throw std::invalid_argument("build_grid: fracture nx must be at least 1");

  add_block(Subdomain::M1, layout_.m1, res_.matrix_nx, res_.matrix_ny);
  if (layout_.m2.width() > 0.0) add_block(Subdomain::M2, layout_.m2, res_.matrix_nx, res_.matrix_ny);
  if (!layout_.reduced()) add_block(Subdomain::Fracture, *layout_.fracture, res_.fracture_nx, res_.matrix_ny);
  build_faces();
}

void Grid::add_block(Subdomain s, const Box& box, int nx, int ny) {
  const auto k = std::size_t(s);
  nx_[k] = nx;
  offset_[k] = int(cells_.size());
  const double dx = box.width() / nx;
  const double dy = box.height() / ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Cell c;
      c.xc = box.x0 + (i + 0.5) * dx;
      c.yc = box.y0 + (j + 0.5) * dy;
      c.dx = dx;
      c.dy = dy;
      c.sub = s;
      c.col = i;
      c.row = j;
      cells_.push_back(c);
    }
  }
}

int Grid::nx(Subdomain s) const { return nx_[std::size_t(s)]; }
int Grid::offset(Subdomain s) const { return offset_[std::size_t(s)]; }

int Grid::cell_index(Subdomain s, int col, int row) const {
  return offset(s) + row * nx(s) + col;
}

void Grid::build_faces() {
  const int ny = res_.matrix_ny;
  cell_faces_.assign(cells_.size(), {-1, -1, -1, -1});

  // East neighbour of the last column of a block, with the face kind.
  auto east_of = [&](Subdomain s, int row) -> std::pair<int, FaceKind> {
    switch (s) {
      case Subdomain::M1:
        if (has(Subdomain::Fracture)) return {cell_index(Subdomain::Fracture, 0, row), FaceKind::Gamma1};
        if (has(Subdomain::M2)) return {cell_index(Subdomain::M2, 0, row), FaceKind::Gamma};
        return {-1, FaceKind::Boundary};
      case Subdomain::Fracture:
        return {cell_index(Subdomain::M2, 0, row), FaceKind::Gamma2};
      case Subdomain::M2:
        return {-1, FaceKind::Boundary};
    }
    return {-1, FaceKind::Boundary};
  };
  auto has_west_neighbor = [&](Subdomain s) { return s != Subdomain::M1; };

  auto add_face = [&](Face f, int owner_side, int neighbor_side) {
    const int idx = int(faces_.size());
    faces_.push_back(f);
    cell_faces_[std::size_t(f.owner)][std::size_t(owner_side)] = idx;
    if (f.neighbor >= 0) cell_faces_[std::size_t(f.neighbor)][std::size_t(neighbor_side)] = idx;
  };

  for (int c = 0; c < int(cells_.size()); ++c) {
    const Cell& cell = cells_[std::size_t(c)];
    const int nxs = nx(cell.sub);
    const double hx = 0.5 * cell.dx, hy = 0.5 * cell.dy;

    if (cell.col == 0 && !has_west_neighbor(cell.sub)) {
      Face f;
      f.owner = c;
      f.kind = FaceKind::Boundary;
      f.edge = Edge::Left;
      f.area = cell.dy;
      f.d_owner = hx;
      f.xc = cell.xc - hx;
      f.yc = cell.yc;
      f.normal_x = true;
      add_face(f, int(Side::West), -1);
    }
    if (cell.row == 0) {
      Face f;
      f.owner = c;
      f.kind = FaceKind::Boundary;
      f.edge = Edge::Bottom;
      f.area = cell.dx;
      f.d_owner = hy;
      f.xc = cell.xc;
      f.yc = cell.yc - hy;
      f.normal_x = false;
      add_face(f, int(Side::South), -1);
    }
    {  // east
      Face f;
      f.owner = c;
      f.area = cell.dy;
      f.d_owner = hx;
      f.xc = cell.xc + hx;
      f.yc = cell.yc;
      f.normal_x = true;
      if (cell.col + 1 < nxs) {
        f.neighbor = c + 1;
        f.kind = FaceKind::Interior;
      } else {
        auto [nb, kind] = east_of(cell.sub, cell.row);
        f.neighbor = nb;
        f.kind = kind;
        if (nb < 0) f.edge = Edge::Right;
      }
      if (f.neighbor >= 0) f.d_neighbor = 0.5 * cells_[std::size_t(f.neighbor)].dx;
      add_face(f, int(Side::East), int(Side::West));
    }
    {  // north
      Face f;
      f.owner = c;
      f.area = cell.dx;
      f.d_owner = hy;
      f.xc = cell.xc;
      f.yc = cell.yc + hy;
      f.normal_x = false;
      if (cell.row + 1 < ny) {
        f.neighbor = c + nxs;
        f.kind = FaceKind::Interior;
        f.d_neighbor = 0.5 * cells_[std::size_t(f.neighbor)].dy;
      } else {
        f.kind = FaceKind::Boundary;
        f.edge = Edge::Top;
      }
      add_face(f, int(Side::North), int(Side::South));
    }
  }
}

std::vector<int> Grid::interface_faces(FaceKind kind) const {
  std::vector<int> out(std::size_t(res_.matrix_ny), -1);
  for (int i = 0; i < int(faces_.size()); ++i) {
    const Face& f = faces_[std::size_t(i)];
    if (f.kind == kind) out[std::size_t(cells_[std::size_t(f.owner)].row)] = i;
  }
  if (!out.empty() && out.front() < 0) return {};
  return out;
}

double Grid::total_area() const {
  double a = 0.0;
  for (const auto& c : cells_) a += c.area();
  return a;
}

std::string Grid::report() const {
  std::ostringstream os;
  os.precision(17);
  os << "grid\n";
  os << "epsilon " << layout_.epsilon << "\n";
  os << "reduced " << (layout_.reduced() ? 1 : 0) << "\n";
  for (Subdomain s : {Subdomain::M1, Subdomain::M2, Subdomain::Fracture}) {
    if (!has(s)) continue;
    const Box& b = layout_.box(s);
    os << "block " << to_string(s) << " x " << b.x0 << " " << b.x1 << " y " << b.y0 << " " << b.y1
       << " cells " << nx(s) << " " << res_.matrix_ny << "\n";
  }
  std::array<int, 5> tally{};
  for (const auto& f : faces_) ++tally[std::size_t(f.kind)];
  os << "cells " << cells_.size() << "\n";
  os << "faces " << faces_.size() << "\n";
  os << "faces_interior " << tally[0] << "\n";
  os << "faces_gamma1 " << tally[1] << "\n";
  os << "faces_gamma2 " << tally[2] << "\n";
  os << "faces_gamma " << tally[3] << "\n";
  os << "faces_boundary " << tally[4] << "\n";
  os << "area " << total_area() << "\n";
  return os.str();
}

Grid build_grid(const DomainLayout& layout, const GridResolution& res) { return Grid(layout, res); }

Grid build_block_grid(const Box& box, int nx, int ny) {
  DomainLayout l;
  l.epsilon = 0.0;
  l.m1 = box;
  l.m2 = Box{box.x1, box.x1, box.y0, box.y1};
  l.gamma1_x = l.gamma2_x = box.x1;
  return Grid(l, GridResolution{nx, ny, 0});
}

double face_transmissibility(const Face& face, double k_owner, double k_neighbor) {
  if (!(k_owner > 0.0 && k_neighbor > 0.0))
    throw std::domain_error("face_transmissibility: conductivities must be positive");
  return face.area / (face.d_owner / k_owner + face.d_neighbor / k_neighbor);
}

double boundary_transmissibility(const Face& face, double k_owner) {
  if (!(k_owner > 0.0)) throw std::domain_error("boundary_transmissibility: conductivity must be positive");
  return face.area * k_owner / face.d_owner;
}

}  // namespace fracflow
