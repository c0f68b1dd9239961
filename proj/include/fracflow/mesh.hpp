#pragma once

// Dimensionless geometry of two matrix blocks separated by a fracture of
// width epsilon, and matching rectangular cell grids over it.
//
// For epsilon > 0 the fracture is a 2-D strip (-eps/2, eps/2) x (0, 1) with
// interfaces Gamma_1 = {-eps/2} x (0,1) and Gamma_2 = {eps/2} x (0,1). For
// epsilon == 0 the blocks abut on the reduced interface Gamma = {0} x (0,1).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fracflow {

enum class Subdomain : std::uint8_t { M1 = 0, M2 = 1, Fracture = 2 };
enum class Edge : std::uint8_t { Left = 0, Right = 1, Bottom = 2, Top = 3 };

std::string to_string(Subdomain s);
std::string to_string(Edge e);

/// Width ratio epsilon together with the porosity (kappa) and conductivity
/// (lambda) scaling exponents. epsilon == 0 selects the reduced geometry.
struct ScalingRegime {
  double epsilon = 1.0;
  double kappa = -1.0;
  double lambda = -1.0;
};

struct Box {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

struct DomainLayout {
  double epsilon = 0.0;
  Box m1, m2;
  std::optional<Box> fracture;  ///< empty for the reduced geometry
  double gamma1_x = 0.0;        ///< x of Gamma_1 (equals gamma2_x == 0 when reduced)
  double gamma2_x = 0.0;

  bool reduced() const { return !fracture.has_value(); }
  const Box& box(Subdomain s) const;
  double total_area() const;
};

/// Layout for the given width. matrix_width selects the block width (1 by
/// default; 0.5 reproduces the narrower blocks of the analysis geometry).
DomainLayout build_geometry(const ScalingRegime& regime, double matrix_width = 1.0);

struct GridResolution {
  int matrix_nx = 1;
  int matrix_ny = 1;
  int fracture_nx = 1;  ///< cells across the fracture; ignored when reduced
};

struct Cell {
  double xc = 0.0, yc = 0.0;
  double dx = 0.0, dy = 0.0;
  Subdomain sub = Subdomain::M1;
  int col = 0, row = 0;  ///< position inside its subdomain block
  double area() const { return dx * dy; }
};

enum class FaceKind : std::uint8_t {
  Interior,  ///< both sides in the same subdomain
  Gamma1,    ///< m1 | fracture
  Gamma2,    ///< fracture | m2
  Gamma,     ///< m1 | m2 on the reduced interface
  Boundary,
};

/// Oriented face. Owner is the cell on the low-x (low-y) side for interior
/// faces; for boundary faces the owner is the only cell and `edge` says which
/// edge of its subdomain block the face lies on.
struct Face {
  int owner = -1;
  int neighbor = -1;  ///< -1 on the boundary
  FaceKind kind = FaceKind::Interior;
  Edge edge = Edge::Left;  ///< boundary faces only
  double area = 0.0;       ///< edge length
  double d_owner = 0.0;    ///< owner centre to face
  double d_neighbor = 0.0;
  double xc = 0.0, yc = 0.0;
  bool normal_x = true;  ///< face normal along x

  bool is_boundary() const { return neighbor < 0; }
};

/// Direction of a face as seen from a cell.
enum class Side : std::uint8_t { West = 0, East = 1, South = 2, North = 3 };

class Grid {
 public:
  Grid(DomainLayout layout, GridResolution res);

  const DomainLayout& layout() const { return layout_; }
  const GridResolution& resolution() const { return res_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t num_cells() const { return cells_.size(); }
  int ny() const { return res_.matrix_ny; }

  /// Face indices of a cell ordered West, East, South, North.
  const std::array<int, 4>& cell_faces(int cell) const { return cell_faces_[std::size_t(cell)]; }

  int nx(Subdomain s) const;
  /// First cell index of a subdomain; cells of a block are row-major.
  int offset(Subdomain s) const;
  int cell_index(Subdomain s, int col, int row) const;
  bool has(Subdomain s) const { return nx(s) > 0; }

  /// Faces on Gamma (reduced) or Gamma_1/Gamma_2, ordered by row.
  std::vector<int> interface_faces(FaceKind kind) const;

  /// Sum of cell areas.
  double total_area() const;

  /// Plain-text summary: counts, extents, face tallies.
  std::string report() const;

 private:
  void add_block(Subdomain s, const Box& box, int nx, int ny);
  void build_faces();

  DomainLayout layout_;
  GridResolution res_;
  std::array<int, 3> nx_{0, 0, 0};
  std::array<int, 3> offset_{0, 0, 0};
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 4>> cell_faces_;
};

/// Matching grid over the layout. Throws std::invalid_argument for
/// non-positive counts.
Grid build_grid(const DomainLayout& layout, const GridResolution& res);

/// A single rectangular block meshed as subdomain M1 (used for merged-domain
/// and manufactured-solution problems).
Grid build_block_grid(const Box& box, int nx, int ny);

/// Distance-weighted harmonic transmissibility A / (d_o/k_o + d_n/k_n).
/// For boundary faces pass only the owner side: A k_o / d_o.
/// Throws std::domain_error for non-positive conductivities.
double face_transmissibility(const Face& face, double k_owner, double k_neighbor);
double boundary_transmissibility(const Face& face, double k_owner);

}  // namespace fracflow
