#include "csbp/tri_cubature.hpp"

#include "csbp/ref1d.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <sstream>

namespace csbp {

namespace {

using Complex = std::complex<double>;

// Orbit parameters recovered from earlier solves of the same moment system.
// They seed the Newton polish when the uniform starting guess does not land
// on an admissible rule. Layout matches unpack_rule().
const std::vector<double>& embedded_parameters(int p) {
  static const std::array<std::vector<double>, 5> table = {{
      {2.0 / 3.0},
      {0.1, 4.0 / 15.0, 0.9},
      {0.025044506019598897, 0.107295201001557, 0.21285435711180833, 0.4270317586439538},
      {0.009130264572197865, 0.04537037037036942, 0.06201621057209475, 0.1420050840967756,
       0.20607267198227727, 0.4243860251718794, 0.298706778799358},
      {0.004361575619977816, 0.022078990549403071, 0.027867771486112428, 0.10367750814276706,
       0.11358876265562107, 0.26533138048460586, 0.15984019211005174, 0.088273960602120158,
       0.5870855671330979, 0.14449130610499253},
  }};
  return table.at(p);
}

int edge_pair_count(int p) { return p / 2; }
bool has_edge_midpoint(int p) { return p % 2 == 1; }

int parameter_count(const OrbitStructure& s) {
  return 1 + edge_pair_count(s.p) + (has_edge_midpoint(s.p) ? 1 : 0) + (s.centroid ? 1 : 0) +
         2 * s.s21_orbits + 3 * s.s111_orbits;
}

template <typename Scalar>
struct RawRule {
  std::vector<std::array<Scalar, 2>> nodes;
  std::vector<Scalar> weights;
};

template <typename Scalar>
void push_bary(RawRule<Scalar>& r, Scalar l0, Scalar l1, Scalar l2, Scalar w) {
  const auto& v = reference_vertices();
  r.nodes.push_back({l0 * v[0].x() + l1 * v[1].x() + l2 * v[2].x(),
                     l0 * v[0].y() + l1 * v[1].y() + l2 * v[2].y()});
  r.weights.push_back(w);
}

// Node order: vertices, face-interior nodes face by face (ascending along the
// face), then centroid, S21 orbits and S111 orbits.
template <typename Scalar>
RawRule<Scalar> unpack_rule(const OrbitStructure& s, const std::vector<Scalar>& x) {
  RawRule<Scalar> r;
  std::size_t k = 0;
  const Scalar wv = x[k++];
  push_bary<Scalar>(r, 1, 0, 0, wv);
  push_bary<Scalar>(r, 0, 1, 0, wv);
  push_bary<Scalar>(r, 0, 0, 1, wv);

  const Lgl1D face = lgl_rule(s.p + 2);
  std::vector<Scalar> face_w(face.n);
  const int npair = edge_pair_count(s.p);
  for (int i = 0; i < npair; ++i) {
    face_w[1 + i] = x[k];
    face_w[face.n - 2 - i] = x[k];
    ++k;
  }
  if (has_edge_midpoint(s.p)) face_w[face.n / 2] = x[k++];
  for (int f = 0; f < 3; ++f) {
    for (int i = 1; i < face.n - 1; ++i) {
      const double t = 0.5 * (face.nodes(i) + 1.0);  // fraction from start vertex
      Scalar l[3] = {0, 0, 0};
      l[kFaceVertices[f][0]] = 1.0 - t;
      l[kFaceVertices[f][1]] = t;
      push_bary<Scalar>(r, l[0], l[1], l[2], face_w[i]);
    }
  }
  if (s.centroid) {
    const Scalar third = 1.0 / 3.0;
    push_bary<Scalar>(r, third, third, third, x[k++]);
  }
  for (int o = 0; o < s.s21_orbits; ++o) {
    const Scalar a = x[k], w = x[k + 1];
    k += 2;
    const Scalar c = Scalar(1) - Scalar(2) * a;
    push_bary<Scalar>(r, c, a, a, w);
    push_bary<Scalar>(r, a, c, a, w);
    push_bary<Scalar>(r, a, a, c, w);
  }
  for (int o = 0; o < s.s111_orbits; ++o) {
    const Scalar a = x[k], b = x[k + 1], w = x[k + 2];
    k += 3;
    const Scalar c = Scalar(1) - a - b;
    push_bary<Scalar>(r, a, b, c, w);
    push_bary<Scalar>(r, b, a, c, w);
    push_bary<Scalar>(r, c, a, b, w);
    push_bary<Scalar>(r, c, b, a, w);
    push_bary<Scalar>(r, a, c, b, w);
    push_bary<Scalar>(r, b, c, a, w);
  }
  return r;
}

template <typename Scalar>
std::vector<Scalar> moment_residual(const OrbitStructure& s, const std::vector<Scalar>& x) {
  const RawRule<Scalar> r = unpack_rule(s, x);
  std::vector<Scalar> res;
  const int d = s.target_degree;
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; a + b <= d; ++b) {
      Scalar q = 0;
      for (std::size_t i = 0; i < r.weights.size(); ++i) {
        Scalar m = r.weights[i];
        for (int e = 0; e < a; ++e) m *= r.nodes[i][0];
        for (int e = 0; e < b; ++e) m *= r.nodes[i][1];
        q += m;
      }
      res.push_back(q - triangle_monomial_moment(a, b));
    }
  }
  return res;
}

Vec residual_vector(const OrbitStructure& s, const Vec& x) {
  const std::vector<double> xs(x.data(), x.data() + x.size());
  const auto r = moment_residual(s, xs);
  return Eigen::Map<const Vec>(r.data(), static_cast<Index>(r.size()));
}

// Complex-step Jacobian of the moment residual.
Mat residual_jacobian(const OrbitStructure& s, const Vec& x) {
  const double h = 1e-30;
  const Index m = x.size();
  std::vector<Complex> xc(m);
  Mat J;
  for (Index k = 0; k < m; ++k) {
    for (Index i = 0; i < m; ++i) xc[i] = Complex(x(i), i == k ? h : 0.0);
    const auto r = moment_residual(s, xc);
    if (k == 0) J.resize(static_cast<Index>(r.size()), m);
    for (std::size_t i = 0; i < r.size(); ++i) J(static_cast<Index>(i), k) = r[i].imag() / h;
  }
  return J;
}

// Damped Newton with minimum-norm steps: halve on residual increase, at most
// 200 iterations.
bool newton_moments(const OrbitStructure& s, Vec& x) {
  Vec r = residual_vector(s, x);
  double rnorm = r.norm();
  for (int it = 0; it < 200 && rnorm > 1e-15; ++it) {
    const Mat J = residual_jacobian(s, x);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
    const Vec dx = cod.solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      const Vec trial = x - lambda * dx;
      const Vec rt = residual_vector(s, trial);
      if (rt.allFinite() && rt.norm() < rnorm) {
        x = trial;
        r = rt;
        rnorm = rt.norm();
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  return r.cwiseAbs().maxCoeff() < 1e-13;
}

Vec uniform_guess(const OrbitStructure& s) {
  const int npar = parameter_count(s);
  const int nnodes = 3 + 3 * s.p + (s.centroid ? 1 : 0) + 3 * s.s21_orbits + 6 * s.s111_orbits;
  Vec x = Vec::Constant(npar, kReferenceArea / nnodes);
  int k = 1 + edge_pair_count(s.p) + (has_edge_midpoint(s.p) ? 1 : 0) + (s.centroid ? 1 : 0);
  for (int o = 0; o < s.s21_orbits; ++o) {
    x(k) = 0.5 * (o + 0.5) / s.s21_orbits;
    k += 2;
  }
  for (int o = 0; o < s.s111_orbits; ++o) {
    x(k) = 0.1 * (o + 1) / (s.s111_orbits + 1);
    x(k + 1) = 0.3 + 0.1 * o / (s.s111_orbits + 1);
    k += 3;
  }
  return x;
}

// Deterministic multistart: random interior orbit positions and uniform weights.
Vec random_guess(const OrbitStructure& s, std::mt19937& gen) {
  std::uniform_real_distribution<double> pos(0.02, 0.48), w(0.2, 1.5);
  Vec x = uniform_guess(s);
  for (Index i = 0; i < x.size(); ++i) x(i) *= w(gen);
  int k = 1 + edge_pair_count(s.p) + (has_edge_midpoint(s.p) ? 1 : 0) + (s.centroid ? 1 : 0);
  for (int o = 0; o < s.s21_orbits; ++o, k += 2) x(k) = pos(gen);
  for (int o = 0; o < s.s111_orbits; ++o, k += 3) {
    x(k) = 0.5 * pos(gen);
    x(k + 1) = 0.3 + 0.5 * pos(gen);
  }
  return x;
}

TriCubature assemble(const OrbitStructure& s, const Vec& x) {
  const std::vector<double> xs(x.data(), x.data() + x.size());
  const RawRule<double> r = unpack_rule(s, xs);
  TriCubature c;
  c.p = s.p;
  const Index n = static_cast<Index>(r.weights.size());
  c.nodes.resize(n, 2);
  c.weights.resize(n);
  for (Index i = 0; i < n; ++i) {
    c.nodes(i, 0) = r.nodes[i][0];
    c.nodes(i, 1) = r.nodes[i][1];
    c.weights(i) = r.weights[i];
  }
  c.vertex_ids = {0, 1, 2};
  for (int f = 0; f < 3; ++f) {
    auto& ids = c.face_node_ids[f];
    ids = {kFaceVertices[f][0], kFaceVertices[f][1]};
    for (int i = 0; i < s.p; ++i) ids.push_back(3 + f * s.p + i);
  }
  return c;
}

}  // namespace

OrbitStructure orbit_structure(int p) {
  switch (p) {
    case 0: return {0, 0, false, 0, 0};
    // Vertices, edge midpoints and centroid carry three weights; imposing
    // degree 3 pins them to a unique positive rule.
    case 1: return {1, 3, true, 0, 0};
    case 2: return {2, 4, false, 1, 0};
    case 3: return {3, 6, false, 2, 0};
    case 4: return {4, 8, false, 2, 1};
    default: throw InvalidArgument("orbit_structure: degree must be in 0..4");
  }
}

double triangle_monomial_moment(int a, int b) {
  // Shift to the unit simplex: xi = -1 + 2u, eta = -1 + 2v, and use
  // int u^i v^j = i! j! / (i + j + 2)!. The alternating sum cancels badly in
  // floating point, so it is accumulated exactly over the common denominator
  // (a + b + 2)!.
  if (a < 0 || b < 0 || a + b > 16) throw InvalidArgument("triangle_monomial_moment: degree out of range");
  using Int = __int128;
  auto binom = [](int n, int k) {
    Int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  auto fact = [](int n) {
    Int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  const Int denom = fact(a + b + 2);
  Int num = 0;
  for (int i = 0; i <= a; ++i) {
    for (int j = 0; j <= b; ++j) {
      const Int sign = ((a - i + b - j) % 2 == 0) ? 1 : -1;
      num += sign * binom(a, i) * binom(b, j) * (Int(1) << (i + j)) * fact(i) * fact(j) *
             (denom / fact(i + j + 2));
    }
  }
  return 4.0 * static_cast<double>(static_cast<long double>(num) / static_cast<long double>(denom));
}

double verify_cubature(const TriCubature& c, int q) {
  double worst = 0.0;
  for (int a = 0; a <= q; ++a) {
    for (int b = 0; a + b <= q; ++b) {
      double quad = 0.0;
      for (Index i = 0; i < c.size(); ++i)
        quad += c.weights(i) * std::pow(c.nodes(i, 0), a) * std::pow(c.nodes(i, 1), b);
      worst = std::max(worst, std::abs(quad - triangle_monomial_moment(a, b)));
    }
  }
  return worst;
}

std::string validate_cubature(const TriCubature& c) {
  std::ostringstream msg;
  const Index n = c.size();
  if (c.nodes.rows() != n) return "node and weight counts differ";
  if ((c.weights.array() <= 0.0).any()) return "non-positive weight";
  const auto& v = reference_vertices();
  for (int k = 0; k < 3; ++k) {
    const int id = c.vertex_ids[k];
    if (id < 0 || id >= n || (c.nodes.row(id).transpose() - v[k]).norm() > 1e-14)
      return "vertex node missing";
  }
  for (Index i = 0; i < n; ++i) {
    const double xi = c.nodes(i, 0), eta = c.nodes(i, 1);
    if (xi < -1 - 1e-14 || eta < -1 - 1e-14 || xi + eta > 1e-14) return "node outside triangle";
  }
  const Lgl1D lgl = lgl_rule(c.p + 2);
  for (int f = 0; f < 3; ++f) {
    const auto& ids = c.face_node_ids[f];
    if (static_cast<int>(ids.size()) != c.p + 2) return "face node count is not p+2";
    const Point a = v[kFaceVertices[f][0]], b = v[kFaceVertices[f][1]];
    if (ids[0] != c.vertex_ids[kFaceVertices[f][0]] || ids[1] != c.vertex_ids[kFaceVertices[f][1]])
      return "face does not start and end at its vertices";
    for (int i = 2; i < c.p + 2; ++i) {
      const Point expect = a + 0.5 * (lgl.nodes(i - 1) + 1.0) * (b - a);
      if ((c.nodes.row(ids[i]).transpose() - expect).norm() > 1e-13)
        return "face node not at an LGL position";
    }
  }
  // Symmetry: every permutation of barycentric coordinates maps the rule to itself.
  static const int perms[6][3] = {{0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}, {2, 0, 1}};
  for (const auto& perm : perms) {
    for (Index i = 0; i < n; ++i) {
      const double l1 = 0.5 * (c.nodes(i, 0) + 1.0), l2 = 0.5 * (c.nodes(i, 1) + 1.0);
      const double l[3] = {1.0 - l1 - l2, l1, l2};
      const Point image = l[perm[0]] * v[0] + l[perm[1]] * v[1] + l[perm[2]] * v[2];
      Index best = -1;
      double dist = 1e300;
      for (Index j = 0; j < n; ++j) {
        const double d = (c.nodes.row(j).transpose() - image).norm();
        if (d < dist) {
          dist = d;
          best = j;
        }
      }
      if (dist > 1e-12 || std::abs(c.weights(best) - c.weights(i)) > 1e-12)
        return "rule is not invariant under the triangle symmetries";
    }
  }
  const double err = verify_cubature(c, 2 * c.p);
  if (err > 1e-12) {
    msg << "moment residual " << err << " exceeds 1e-12 for degree " << 2 * c.p;
    return msg.str();
  }
  return {};
}

TriCubature build_tri_cubature(int p) {
  const OrbitStructure s = orbit_structure(p);
  Vec x = uniform_guess(s);
  if (newton_moments(s, x)) {
    TriCubature c = assemble(s, x);
    if (validate_cubature(c).empty()) return c;
  }
  const auto& seed = embedded_parameters(p);
  if (!seed.empty()) {
    x = Eigen::Map<const Vec>(seed.data(), static_cast<Index>(seed.size()));
    if (newton_moments(s, x)) {
      TriCubature c = assemble(s, x);
      const std::string why = validate_cubature(c);
      if (why.empty()) return c;
      throw ConstructionError("build_tri_cubature: embedded rule invalid: " + why);
    }
  }
  std::mt19937 gen(20240601u);
  for (int trial = 0; trial < 400; ++trial) {
    x = random_guess(s, gen);
    if (!newton_moments(s, x)) continue;
    TriCubature c = assemble(s, x);
    if (validate_cubature(c).empty()) return c;
  }
  std::ostringstream msg;
  msg << "build_tri_cubature: no admissible degree-" << p << " rule found";
  throw ConstructionError(msg.str());
}

FaceRule face_rule(int p, double face_length) {
  if (p < 0) throw InvalidArgument("face_rule: negative degree");
  if (!(face_length > 0.0)) throw InvalidArgument("face_rule: face length must be positive");
  const Lgl1D lgl = lgl_rule(p + 2);
  FaceRule r;
  r.p = p;
  const int n = p + 2;
  r.nodes.resize(n);
  r.B.resize(n);
  r.nodes(0) = lgl.nodes(0);
  r.B(0) = lgl.weights(0);
  r.nodes(1) = lgl.nodes(n - 1);
  r.B(1) = lgl.weights(n - 1);
  for (int i = 1; i < n - 1; ++i) {
    r.nodes(i + 1) = lgl.nodes(i);
    r.B(i + 1) = lgl.weights(i);
  }
  r.B *= 0.5 * face_length;
  return r;
}

}  // namespace csbp
