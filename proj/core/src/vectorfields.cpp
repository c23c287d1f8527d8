#include "swarmcov/vectorfields.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <memory>
#include <sstream>

namespace swarmcov {

bool FieldFamily::all_exact_flows() const {
  for (const auto& f : fields) {
    if (!f.has_exact_flow()) return false;
  }
  return !fields.empty();
}

Point evaluate(const VectorField& field, const Point& x) {
  if (x.size() != field.dim) {
    std::ostringstream msg;
    msg << "field '" << field.name << "' expects a point of dimension " << field.dim << ", got "
        << x.size();
    throw UsageError(msg.str());
  }
  if (!x.allFinite()) throw UsageError("field '" + field.name + "' evaluated at a non-finite point");
  return field.eval(x);
}

Point lie_bracket_numeric(const VectorField& X, const VectorField& Y, const Point& x, double h) {
  const Point xv = X.eval(x);
  const Point yv = Y.eval(x);
  // DY(x) X(x) and DX(x) Y(x) as central directional differences.
  const Point dy_along_x = (Y.eval(x + h * xv) - Y.eval(x - h * xv)) / (2.0 * h);
  const Point dx_along_y = (X.eval(x + h * yv) - X.eval(x - h * yv)) / (2.0 * h);
  return dy_along_x - dx_along_y;
}

VectorField bracket_field(const VectorField& X, const VectorField& Y, double h) {
  VectorField out;
  out.name = "[" + X.name + "," + Y.name + "]";
  out.dim = X.dim;
  out.eval = [X, Y, h](const Point& x) { return lie_bracket_numeric(X, Y, x, h); };
  return out;
}

Eigen::MatrixXd sphere_tangent_projector(const Point& x) {
  const Eigen::Index n = x.size();
  const double nn = x.squaredNorm();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  if (nn > 0.0) p -= (x * x.transpose()) / nn;
  return p;
}

RankReport bracket_generating_rank(const FieldFamily& family, const Point& x, int depth,
                                   const TangentProjector& projector) {
  if (depth < 0) throw UsageError("bracket depth must be >= 0");
  if (family.fields.empty()) return {};
  if (x.size() != family.dim) throw UsageError("rank query point has the wrong dimension");

  std::vector<VectorField> all = family.fields;
  std::vector<VectorField> level = family.fields;
  for (int d = 1; d <= depth; ++d) {
    std::vector<VectorField> next;
    for (std::size_t a = 0; a < family.size(); ++a) {
      for (std::size_t b = 0; b < level.size(); ++b) {
        // At depth 1 the pairs (a,b) and (b,a) span the same line, and (a,a) vanishes.
        if (d == 1 && b <= a) continue;
        next.push_back(bracket_field(family.fields[a], level[b]));
      }
    }
    if (next.empty()) break;
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }

  Eigen::MatrixXd stacked(family.dim, static_cast<Eigen::Index>(all.size()));
  for (std::size_t j = 0; j < all.size(); ++j) {
    stacked.col(static_cast<Eigen::Index>(j)) = all[j].eval(x);
  }
  if (projector) stacked = projector(x) * stacked;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  RankReport report;
  report.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (smax > 0.0 && sv(i) >= kRankTolerance * smax) ++report.rank;
  }
  if (depth >= 2) {
    std::ostringstream msg;
    msg << "depth " << depth << " nests finite differences; roundoff ~ eps*h^-" << depth
        << " may approach the rank tolerance";
    report.warning = msg.str();
  }
  return report;
}

namespace {

VectorField brockett_x1() {
  VectorField f;
  f.name = "X1";
  f.dim = 3;
  f.eval = [](const Point& x) { return make_point({1.0, 0.0, -x[1]}); };
  f.exact_flow = [](const Point& x, double t) {
    return make_point({x[0] + t, x[1], x[2] - t * x[1]});
  };
  return f;
}

VectorField brockett_x2() {
  VectorField f;
  f.name = "X2";
  f.dim = 3;
  f.eval = [](const Point& x) { return make_point({0.0, 1.0, x[0]}); };
  f.exact_flow = [](const Point& x, double t) {
    return make_point({x[0], x[1] + t, x[2] + t * x[0]});
  };
  return f;
}

}  // namespace

FieldFamily builtin_brockett() {
  return FieldFamily{"brockett", 3, {brockett_x1(), brockett_x2()}};
}

Eigen::Matrix3d sphere_generator(int i) {
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  switch (i) {
    case 1:
      b(0, 1) = -1.0;
      b(1, 0) = 1.0;
      break;
    case 2:
      b(0, 2) = 1.0;
      b(2, 0) = -1.0;
      break;
    case 3:
      b(1, 2) = -1.0;
      b(2, 1) = 1.0;
      break;
    default:
      throw UsageError("sphere generator index must be 1, 2 or 3");
  }
  return b;
}

VectorField sphere_field(int i) {
  const Eigen::Matrix3d b = sphere_generator(i);
  // Each B_i has a unit rotation axis, so B^3 = -B and Rodrigues' formula is exact.
  const Eigen::Matrix3d b2 = b * b;
  VectorField f;
  f.name = "X~" + std::to_string(i);
  f.dim = 3;
  f.eval = [b](const Point& x) -> Point { return b * x.head<3>(); };
  f.exact_flow = [b, b2](const Point& x, double t) -> Point {
    const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + std::sin(t) * b + (1.0 - std::cos(t)) * b2;
    return r * x.head<3>();
  };
  return f;
}

FieldFamily builtin_sphere() { return FieldFamily{"sphere", 3, {sphere_field(1), sphere_field(2)}}; }

FieldFamily builtin_coordinate(int dim) {
  if (dim < 1 || dim > kMaxDim) throw UsageError("coordinate family dimension must be in 1..3");
  FieldFamily fam{"coordinate", dim, {}};
  for (int i = 0; i < dim; ++i) {
    VectorField f;
    f.name = "d/dx" + std::to_string(i + 1);
    f.dim = dim;
    f.eval = [dim, i](const Point&) {
      Point e = Point::Zero(dim);
      e[i] = 1.0;
      return e;
    };
    f.exact_flow = [i](const Point& x, double t) {
      Point y = x;
      y[i] += t;
      return y;
    };
    fam.fields.push_back(std::move(f));
  }
  return fam;
}

FieldFamily builtin_family(std::string_view name, int dim) {
  if (name == "brockett") return builtin_brockett();
  if (name == "sphere") return builtin_sphere();
  if (name == "coordinate") return builtin_coordinate(dim);
  throw UsageError("unknown field family '" + std::string(name) + "'");
}

}  // namespace swarmcov
