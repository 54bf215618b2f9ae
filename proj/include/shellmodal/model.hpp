/** @file model.hpp

    @brief Shell models: multi-patch NURBS geometry with merged control
    points, cached reference quadrature data, boundary conditions and
    penalty constraints, plus generators for square plates, disks and
    nanotubes.
*/
#pragma once

#include "shellmodal/common.hpp"
#include "shellmodal/geometry.hpp"
#include "shellmodal/material.hpp"
#include "shellmodal/nurbs.hpp"

#include <string>
#include <vector>

namespace shellmodal {

enum class Boundary { Free, SimplySupported, Clamped };
enum class Shape { SquarePlate, Disk, Tube };

Boundary boundary_from_name(const std::string& name);
std::string to_string(Boundary b);
std::string to_string(Shape s);

/// Armchair direction field. Flat sheets carry one constant direction;
/// rolled sheets (nanotubes) carry a direction at the chiral angle from the
/// tube axis, rotated with the local circumferential direction.
struct LatticeOrientation {
    Vec3 armchair = Vec3::UnitX();
    bool rolled = false;
    Vec3 axis = Vec3::UnitZ();
    Vec3 origin = Vec3::Zero();
    double chiral_angle = 0.0;

    Vec3 at(const Vec3& x) const;
};

/// Reference data of one quadrature point. Basis rows follow Element::nodes.
struct QuadPoint {
    PointBasis basis;
    double dA = 0.0;         ///< Gauss weight times reference area element
    Mat2 A = Mat2::Identity();
    Mat2 B = Mat2::Zero();
    Mat2 lattice = Mat2::Identity();
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
};

struct Element {
    int patch = 0;
    int index = 0;           ///< element index within its patch
    std::vector<int> nodes;  ///< global node ids
    std::vector<QuadPoint> qps;
};

/// A point on a patch edge with the basis of the element that owns it.
struct EdgePoint {
    int element = 0;
    PointBasis basis;
    Vec3 normal = Vec3::UnitZ();  ///< reference normal
};

/// Clamped-edge penalty (k/2)|n - N|^2 ds.
struct RotationPenaltyPoint {
    EdgePoint side;
    double ds = 0.0;
};

/// Patch-interface penalty (k/2)|(n+ - n-) - (N+ - N-)|^2 ds.
struct InterfacePenaltyPoint {
    EdgePoint plus, minus;
    double ds = 0.0;
};

/// Patch side: 0 u = first, 1 u = last, 2 v = first, 3 v = last.
struct PatchEdge {
    int patch = 0;
    int side = 0;
};

struct ShellModel {
    Shape shape = Shape::SquarePlate;
    std::vector<NurbsPatch> patches;
    std::vector<std::vector<int>> patch_nodes;  ///< global id per patch control point
    std::vector<Vec3> nodes;                    ///< reference control points (merged)
    MaterialParams material;
    LatticeOrientation lattice;
    Boundary boundary = Boundary::SimplySupported;
    std::vector<std::array<bool, 3>> fixed;     ///< Dirichlet mask per node
    std::vector<PatchEdge> boundary_edges;
    std::vector<std::pair<PatchEdge, PatchEdge>> interfaces;
    double kp = 0.0;                            ///< clamped-edge penalty [nN]
    double k_interface = 0.0;                   ///< interface G1 penalty [nN]
    std::vector<Element> elements;
    std::vector<RotationPenaltyPoint> rotation_penalty;
    std::vector<InterfacePenaltyPoint> interface_penalty;

    double size = 0.0;    ///< edge length, disk radius or tube radius [nm]
    double length = 0.0;  ///< tube length [nm]
    Vec3 center = Vec3::Zero();
    Vec3 axis = Vec3::UnitZ();
    int chirality_n = 0, chirality_m = 0;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_dofs() const { return 3 * num_nodes(); }
    double reference_area() const;
    /// Global dof indices not fixed by Dirichlet conditions, ascending.
    std::vector<int> free_dofs() const;
    /// Reference nodes plus displacement `u` (3 per node).
    std::vector<Vec3> current_nodes(const VecX& u) const;
    /// Physical point and basis of patch parameter (xi, eta).
    ElementBasis basis_at(int patch, const Vec2& xi, int* element = nullptr) const;
};

/// Options shared by the generators.
struct MeshOptions {
    int degree = 2;
    Boundary boundary = Boundary::SimplySupported;
    double kp_factor = 1e3;         ///< k_p = kp_factor * c_bend / (1 nm)
    double interface_factor = 1e4;  ///< interface penalty, same scaling
    double armchair_angle = 0.0;    ///< in-plane rotation of the lattice [rad] (flat sheets)
    int quadrature = 0;             ///< Gauss points per direction, 0 = degree + 1
};

/// Square plate [0, L]^2 in the xy-plane with m x n elements.
ShellModel make_square_plate(double L, int m, int n, const MaterialParams& mat, const MeshOptions& opt = {});

/// Disk of radius a centred at the origin in the xy-plane: an inner square
/// patch and four ruled outer patches. `elements` spans each square side.
ShellModel make_disk(double radius, int elements, const MaterialParams& mat, const MeshOptions& opt = {});

/// Nanotube radius from chirality: sqrt(3) a_cc / (2 pi) sqrt(n^2 + nm + m^2).
double cnt_radius(int n, int m);
/// Chiral angle atan(sqrt(3) m / (2n + m)).
double cnt_chiral_angle(int n, int m);

/// Tube of chirality (n, m), length AR * 2R along z, centred at the origin.
/// Periodic (C1) in the circumferential direction.
ShellModel make_cnt(int n, int m, double aspect_ratio, int circ_elements, int axial_elements,
                    const MaterialParams& mat, const MeshOptions& opt = {});

/// Recomputes quadrature caches, boundary masks and penalty points after
/// the patches, nodes and boundary type are set.
void finalize_model(ShellModel& model, const MeshOptions& opt);

} // namespace shellmodal
