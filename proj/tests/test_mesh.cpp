#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fracflow/mesh.hpp"

using namespace fracflow;

TEST_CASE("geometry") {
  const auto l = build_geometry({0.01, -1, -1});
  CHECK(l.m1.x0 == doctest::Approx(-1.005));
  CHECK(l.m1.x1 == doctest::Approx(-0.005));
  CHECK(l.m2.x0 == doctest::Approx(0.005));
  CHECK(l.fracture->width() == doctest::Approx(0.01));
  CHECK(l.total_area() == doctest::Approx(2.01));

  const auto r = build_geometry({0.0, -1, -1});
  CHECK(r.reduced());
  CHECK(r.m1.x1 == 0.0);
  CHECK(r.m2.x0 == 0.0);
  CHECK_THROWS_AS(r.box(Subdomain::Fracture), std::logic_error);

  CHECK(build_geometry({0.1, -1, -1}, 0.5).m1.x0 == doctest::Approx(-0.55));
  CHECK_THROWS_AS(build_geometry({-0.1, -1, -1}), std::invalid_argument);
}

TEST_CASE("grid sizes") {
  const Grid g1 = build_grid(build_geometry({1.0, -1, -1}), {160, 160, 160});
  CHECK(g1.num_cells() == 3u * 160 * 160);
  const Grid g2 = build_grid(build_geometry({0.01, -1, -1}), {160, 160, 40});
  CHECK(g2.nx(Subdomain::Fracture) == 40);
  CHECK(g2.num_cells() == 2u * 160 * 160 + 40 * 160);
  CHECK(g2.cells()[std::size_t(g2.offset(Subdomain::Fracture))].dx == doctest::Approx(1.0 / 4000));
  CHECK(g2.total_area() == doctest::Approx(2.01).epsilon(1e-12));
  const Grid g0 = build_grid(build_geometry({0.0, -1, -1}), {8, 8, 4});
  CHECK(!g0.has(Subdomain::Fracture));
  CHECK(g0.num_cells() == 128u);
}

TEST_CASE("face bookkeeping") {
  const Grid g = build_grid(build_geometry({0.1, -1, -1}), {3, 2, 2});
  const auto& faces = g.faces();
  int gamma1 = 0, gamma2 = 0, boundary = 0;
  for (const auto& f : faces) {
    gamma1 += f.kind == FaceKind::Gamma1;
    gamma2 += f.kind == FaceKind::Gamma2;
    boundary += f.kind == FaceKind::Boundary;
    if (f.neighbor >= 0) {
      // Owner is the low-x / low-y side.
      const Cell& o = g.cells()[std::size_t(f.owner)];
      const Cell& n = g.cells()[std::size_t(f.neighbor)];
      CHECK((f.normal_x ? o.xc < n.xc : o.yc < n.yc));
      CHECK(f.d_owner + f.d_neighbor == doctest::Approx(f.normal_x ? n.xc - o.xc : n.yc - o.yc));
    }
  }
  CHECK(gamma1 == 2);
  CHECK(gamma2 == 2);
  // left + right edges (2 rows each) and bottom + top of every column (3 + 2 + 3 = 8 columns).
  CHECK(boundary == 4 + 16);
  CHECK(g.interface_faces(FaceKind::Gamma1).size() == 2u);
  CHECK(g.interface_faces(FaceKind::Gamma).empty());

  // W, E, S, N order.
  for (int c = 0; c < int(g.num_cells()); ++c) {
    const auto cf = g.cell_faces(c);
    const Cell& cell = g.cells()[std::size_t(c)];
    CHECK(faces[std::size_t(cf[0])].xc == doctest::Approx(cell.xc - cell.dx / 2));
    CHECK(faces[std::size_t(cf[1])].xc == doctest::Approx(cell.xc + cell.dx / 2));
    CHECK(faces[std::size_t(cf[2])].yc == doctest::Approx(cell.yc - cell.dy / 2));
    CHECK(faces[std::size_t(cf[3])].yc == doctest::Approx(cell.yc + cell.dy / 2));
  }

  const Grid r = build_grid(build_geometry({0.0, -1, -1}), {3, 4, 0});
  CHECK(r.interface_faces(FaceKind::Gamma).size() == 4u);
}

TEST_CASE("transmissibility") {
  Face f;
  f.area = 2.0;
  f.d_owner = 0.5;
  f.d_neighbor = 0.25;
  // 2 / (0.5/1 + 0.25/4)
  CHECK(face_transmissibility(f, 1.0, 4.0) == doctest::Approx(2.0 / 0.5625));
  CHECK(boundary_transmissibility(f, 3.0) == doctest::Approx(12.0));
  CHECK_THROWS_AS(face_transmissibility(f, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(boundary_transmissibility(f, -1.0), std::domain_error);
}

TEST_CASE("grid report") {
  const Grid g = build_grid(build_geometry({0.5, -1, -1}), {2, 2, 1});
  const auto rep = g.report();
  CHECK(rep.find("cells 10") != std::string::npos);
  CHECK(rep.find("faces_gamma1 2") != std::string::npos);
  CHECK(rep.find("block f") != std::string::npos);
}

TEST_CASE("single block grid") {
  const Grid g = build_block_grid({0.0, 1.0, 0.0, 1.0}, 4, 4);
  CHECK(g.num_cells() == 16u);
  CHECK(!g.has(Subdomain::M2));
  int boundary = 0;
  for (const auto& f : g.faces()) boundary += f.kind == FaceKind::Boundary;
  CHECK(boundary == 16);
}
