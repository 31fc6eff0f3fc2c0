#include "hardball/neutral.hpp"

#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace hardball {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd ball_velocity(const std::vector<double>& all, int ball, int dim) {
  return Eigen::Map<const VectorXd>(all.data() + std::size_t(ball) * dim, dim);
}

VectorXd relative_pre(const CollisionEvent& e, int dim) {
  return ball_velocity(e.pre_velocities, e.i, dim) - ball_velocity(e.pre_velocities, e.j, dim);
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

// Orthonormal null space of m (columns), empty if m has full column rank.
MatrixXd null_space(const MatrixXd& m, double tol) {
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol * smax && s(k) > 0.0) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

int numerical_rank(const MatrixXd& m, double tol, VectorXd* singular_values) {
  if (m.rows() == 0 || m.cols() == 0) {
    if (singular_values) singular_values->resize(0);
    return 0;
  }
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const VectorXd& s = svd.singularValues();
  if (singular_values) *singular_values = s;
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol * s(0) && s(k) > 0.0) ++rank;
  return rank;
}

NeutralBasis neutral_direct(const OrbitSegment& seg, const NeutralOptions& opt) {
  const int dim = seg.params.dim;
  const int coords = seg.params.coordinates();
  const Eigen::Index n = static_cast<Eigen::Index>(seg.size());
  const Eigen::Index unknowns = coords + n;

  // displacement of every coordinate as a linear form in (W, alpha_1..alpha_n)
  MatrixXd disp = MatrixXd::Zero(coords, unknowns);
  disp.leftCols(coords).setIdentity();
  MatrixXd constraints(n * dim, unknowns);

  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& e = seg.events[k];
    const VectorXd dv = relative_pre(e, dim);
    if (dv.norm() == 0.0)
      throw Error(ErrorCode::SingularSegment, "collision " + std::to_string(k + 1) + " has zero relative velocity");
    auto rows = constraints.middleRows(k * dim, dim);
    rows = disp.middleRows(e.i * dim, dim) - disp.middleRows(e.j * dim, dim);
    rows.col(coords + k) -= dv;
    for (int b : {e.i, e.j}) {
      const VectorXd jump = ball_velocity(e.post_velocities, b, dim) - ball_velocity(e.pre_velocities, b, dim);
      disp.middleRows(b * dim, dim).col(coords + k) += jump;
    }
  }

  const MatrixXd kernel = null_space(constraints, opt.rank_tol);
  NeutralBasis out;
  out.dim = static_cast<int>(kernel.cols());
  if (out.dim == 0) {
    out.basis.resize(coords, 0);
    out.advances.resize(n, 0);
    return out;
  }
  // the W block is injective on the kernel; orthonormalize it and carry the
  // advances along with the same change of basis
  const MatrixXd w = kernel.topRows(coords);
  Eigen::HouseholderQR<MatrixXd> qr(w);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(coords, out.dim);
  const MatrixXd r = qr.matrixQR().topRows(out.dim).triangularView<Eigen::Upper>();
  MatrixXd alpha = kernel.bottomRows(n);
  r.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(alpha);
  out.basis = q;
  out.advances = alpha;
  return out;
}

double standard_mass_fraction(double m_b, double m_c) { return m_c / (m_b + m_c); }

std::map<std::size_t, VectorXd> cpf_coefficients(const OrbitSegment& seg, int ball_a, int ball_b,
                                                 std::optional<std::size_t> prefix, MassFraction fraction) {
  const int n_balls = seg.params.n_balls;
  const int dim = seg.params.dim;
  const auto& masses = seg.params.masses;
  const std::size_t m = prefix.value_or(seg.size());
  if (m > seg.size()) throw Error(ErrorCode::BadDimension, "CPF prefix longer than the segment");
  if (ball_a == ball_b || ball_a < 0 || ball_b < 0 || ball_a >= n_balls || ball_b >= n_balls)
    throw Error(ErrorCode::NotConnectedPair, "CPF needs two distinct balls");

  // Events are taken in reverse time (latest first). Times are replaced by
  // the event order: t(event p) = p - m < 0, the reference time is 0.
  auto t_of = [m](std::size_t p) { return static_cast<double>(p) - static_cast<double>(m); };

  // spanning forest: reverse-time edges that lower the component count
  UnionFind sets(n_balls);
  std::vector<std::vector<std::pair<int, std::size_t>>> forest(n_balls);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t p = m - 1 - r;
    const auto& e = seg.events[p];
    if (sets.unite(e.i, e.j)) {
      forest[e.i].emplace_back(e.j, p);
      forest[e.j].emplace_back(e.i, p);
    }
  }
  if (sets.find(ball_a) != sets.find(ball_b))
    throw Error(ErrorCode::NotConnectedPair, "balls " + std::to_string(ball_a + 1) + " and " +
                                                 std::to_string(ball_b + 1) + " are not connected");

  // unique forest path B_0 = a, ..., B_h = b with edges f_1..f_h
  std::vector<int> parent(n_balls, -1);
  std::vector<std::size_t> parent_edge(n_balls, 0);
  std::vector<bool> seen(n_balls, false);
  std::queue<int> frontier;
  frontier.push(ball_a);
  seen[ball_a] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (const auto& [w, p] : forest[u])
      if (!seen[w]) {
        seen[w] = true;
        parent[w] = u;
        parent_edge[w] = p;
        frontier.push(w);
      }
  }
  std::vector<int> vertices{ball_b};
  std::vector<std::size_t> edges;
  for (int v = ball_b; v != ball_a; v = parent[v]) {
    edges.push_back(parent_edge[v]);
    vertices.push_back(parent[v]);
  }
  std::reverse(vertices.begin(), vertices.end());
  std::reverse(edges.begin(), edges.end());
  const std::size_t h = edges.size();

  // t(f_i) for i = 0..h+1 with t(f_0) = t(f_{h+1}) = 0
  auto tf = [&](std::size_t i) { return (i == 0 || i == h + 1) ? 0.0 : t_of(edges[i - 1]); };

  std::map<std::size_t, VectorXd> gamma;
  auto add = [&](std::size_t p, const VectorXd& g) {
    auto it = gamma.find(p);
    if (it == gamma.end())
      gamma.emplace(p, g);
    else
      it->second += g;
  };

  for (std::size_t i = 1; i <= h; ++i) {
    const auto& e = seg.events[edges[i - 1]];
    const int b_prev = vertices[i - 1];
    const int b_cur = vertices[i];
    const VectorXd minus = ball_velocity(e.pre_velocities, b_prev, dim) - ball_velocity(e.pre_velocities, b_cur, dim);
    const VectorXd plus = ball_velocity(e.post_velocities, b_prev, dim) - ball_velocity(e.post_velocities, b_cur, dim);
    const double before = tf(i - 1);
    const double at = tf(i);
    const double after = tf(i + 1);
    // weight of b_prev's mass is m_prev / (m_cur + m_prev)
    const double w_prev = fraction(masses[b_cur], masses[b_prev]);
    const double w_cur = fraction(masses[b_prev], masses[b_cur]);
    VectorXd g;
    if (before < at && after < at)
      g = minus;
    else if (before > at && after > at)
      g = plus;
    else if (after < at && at < before)
      g = w_prev * minus + w_cur * plus;
    else
      g = w_prev * plus + w_cur * minus;
    add(edges[i - 1], g);
  }

  // adjacent edges at every path vertex
  for (std::size_t i = 0; i <= h; ++i) {
    const int b = vertices[i];
    const double sign = (tf(i) - tf(i + 1)) > 0.0 ? 1.0 : -1.0;
    for (std::size_t p = 0; p < m; ++p) {
      const auto& e = seg.events[p];
      if (e.i != b && e.j != b) continue;
      const double t = t_of(p);
      bool adjacent;
      if (i == 0)
        adjacent = t > tf(1);
      else if (i == h)
        adjacent = t > tf(h);
      else
        adjacent = (t - tf(i)) * (t - tf(i + 1)) < 0.0;
      if (!adjacent) continue;
      const int c = e.i == b ? e.j : e.i;
      const VectorXd jump = (ball_velocity(e.post_velocities, b, dim) - ball_velocity(e.post_velocities, c, dim)) -
                            (ball_velocity(e.pre_velocities, b, dim) - ball_velocity(e.pre_velocities, c, dim));
      add(p, sign * fraction(masses[b], masses[c]) * jump);
    }
  }
  return gamma;
}

double cpf_verify(const OrbitSegment& seg, const NeutralBasis& basis, MassFraction fraction) {
  const int n_balls = seg.params.n_balls;
  const int dim = seg.params.dim;
  const auto scheme = scheme_of(seg);
  const auto comps = components(scheme.pairs, n_balls);

  std::vector<std::pair<int, int>> pairs;
  std::vector<std::map<std::size_t, VectorXd>> coefficients;
  for (int a = 0; a < n_balls; ++a)
    for (int b = a + 1; b < n_balls; ++b)
      if (comps.label[a] == comps.label[b]) {
        pairs.emplace_back(a, b);
        coefficients.push_back(cpf_coefficients(seg, a, b, std::nullopt, fraction));
      }

  double worst = 0.0;
  for (int col = 0; col < basis.dim; ++col) {
    VectorXd disp = basis.basis.col(col);
    for (std::size_t k = 0; k < seg.size(); ++k) {
      const auto& e = seg.events[k];
      const double alpha = basis.advances(static_cast<Eigen::Index>(k), col);
      for (int b : {e.i, e.j})
        disp.segment(b * dim, dim) +=
            alpha * (ball_velocity(e.post_velocities, b, dim) - ball_velocity(e.pre_velocities, b, dim));
    }
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const auto [a, b] = pairs[q];
      const VectorXd lhs = disp.segment(a * dim, dim) - disp.segment(b * dim, dim);
      VectorXd rhs = VectorXd::Zero(dim);
      // translations have lhs = 0 and alpha = 0; the basis vector's own
      // length keeps the ratio meaningful for them
      double scale = basis.basis.col(col).norm() + lhs.norm();
      for (const auto& [p, g] : coefficients[q]) {
        const double alpha = basis.advances(static_cast<Eigen::Index>(p), col);
        rhs += alpha * g;
        scale += std::abs(alpha) * g.norm();
      }
      if (scale > 0.0) worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
  }
  return worst;
}

AdvanceSystem advance_system(const OrbitSegment& seg, const NeutralOptions& opt, MassFraction fraction) {
  const int n_balls = seg.params.n_balls;
  const int dim = seg.params.dim;
  const Eigen::Index n = static_cast<Eigen::Index>(seg.size());

  AdvanceSystem out;
  UnionFind sets(n_balls);
  int merges = 0;
  std::vector<MatrixXd> blocks;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& e = seg.events[k];
    if (sets.find(e.i) != sets.find(e.j)) {
      sets.unite(e.i, e.j);
      ++merges;
      continue;
    }
    const VectorXd dv = relative_pre(e, dim);
    if (dv.norm() == 0.0)
      throw Error(ErrorCode::SingularSegment, "collision " + std::to_string(k + 1) + " has zero relative velocity");
    MatrixXd block = MatrixXd::Zero(dim, n);
    for (const auto& [p, g] : cpf_coefficients(seg, e.i, e.j, static_cast<std::size_t>(k), fraction))
      block.col(static_cast<Eigen::Index>(p)) += g;
    block.col(k) -= dv;
    blocks.push_back(std::move(block));
    out.closing.push_back(static_cast<std::size_t>(k));
  }
  out.equations = static_cast<int>(blocks.size());
  out.matrix.resize(static_cast<Eigen::Index>(blocks.size()) * dim, n);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    out.matrix.middleRows(static_cast<Eigen::Index>(b) * dim, dim) = blocks[b];
  out.p_sigma = n_balls - merges;
  out.dim_alpha = static_cast<int>(n) - numerical_rank(out.matrix, opt.rank_tol);
  out.dim_neutral = dim * out.p_sigma + out.dim_alpha;
  return out;
}

double advance_residual(const AdvanceSystem& system, const NeutralBasis& basis) {
  if (system.matrix.rows() == 0 || basis.dim == 0) return 0.0;
  const MatrixXd res = system.matrix * basis.advances;
  const double scale = system.matrix.norm() * basis.advances.norm();
  return scale > 0.0 ? res.norm() / scale : 0.0;
}

template <class T>
JacobianResult neutral_jacobian(const OrbitSegment& seg, const JacobianOptions& opt) {
  const auto& params = seg.params;
  const int coords = params.coordinates();
  const std::size_t n = seg.size();
  JacobianResult out;
  if (n == 0) {
    out.dim = coords;
    out.dim_endpoint = coords;
    return out;
  }

  const StopCondition stop{static_cast<std::int64_t>(n), std::nullopt};
  auto same_scheme = [&](const BasicOrbitSegment<T>& run) {
    if (run.size() != n) return false;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& a = run.events[k];
      const auto& b = seg.events[k];
      if (a.i != b.i || a.j != b.j || a.adjustment != b.adjustment) return false;
    }
    return true;
  };

  const auto start = state_cast<T>(seg.initial);
  if (!same_scheme(simulate<T>(params, start, stop, opt.dynamics)))
    throw Error(ErrorCode::SchemeChanged, "re-simulation does not reproduce the recorded collision sequence");

  using std::pow;
  const T step = opt.step > 0.0 ? T(opt.step)
                                 : pow(T(10), -T(std::numeric_limits<T>::digits10 / 3));
  const int probes = 2 * coords;
  std::vector<std::vector<T>> history(probes);
  std::vector<std::exception_ptr> failures(probes);

  auto run_probe = [&](int p) {
    try {
      auto s = start;
      const int c = p / 2;
      s.positions[c] += (p % 2 == 0) ? step : -step;
      const auto run = simulate<T>(params, s, stop, opt.dynamics);
      if (!same_scheme(run))
        throw Error(ErrorCode::SchemeChanged,
                    "probe on coordinate " + std::to_string(c) + " changed the collision sequence");
      auto& h = history[p];
      h.reserve(n * std::size_t(coords));
      for (const auto& e : run.events) h.insert(h.end(), e.post_velocities.begin(), e.post_velocities.end());
    } catch (...) {
      failures[p] = std::current_exception();
    }
  };

  if (opt.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < probes; ++p) run_probe(p);
  } else {
    for (int p = 0; p < probes; ++p) run_probe(p);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * coords;
  Matrix jac(rows, coords);
  for (int c = 0; c < coords; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) jac(r, c) = (history[2 * c][r] - history[2 * c + 1][r]) / (2 * step);

  // each collision's block is rescaled to unit norm: growth along the orbit
  // would otherwise hide early constraints below the rank threshold. Later
  // constraints still sit near exp(-lambda k), so the SVD runs in T as well.
  for (std::size_t k = 0; k < n; ++k) {
    auto block = jac.middleRows(static_cast<Eigen::Index>(k) * coords, coords);
    const T norm = block.norm();
    if (norm > T(0)) block /= norm;
  }
  auto rank_of = [&](const Matrix& m, const T& tol, Eigen::VectorXd* sv) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (sv) {
      sv->resize(s.size());
      for (Eigen::Index k = 0; k < s.size(); ++k) (*sv)(k) = to_double(s(k));
    }
    if (s.size() == 0 || s(0) == T(0)) return 0;
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) > tol * s(0)) ++rank;
    return rank;
  };
  const T endpoint_tol = opt.endpoint_rank_tol > 0.0
                            ? T(opt.endpoint_rank_tol)
                            : pow(std::numeric_limits<T>::epsilon(), T(1) / 3);
  out.dim = coords - rank_of(jac, T(opt.rank_tol), &out.singular_values);
  out.dim_endpoint = coords - rank_of(jac.bottomRows(coords), endpoint_tol, nullptr);
  return out;
}

template JacobianResult neutral_jacobian<double>(const OrbitSegment&, const JacobianOptions&);
template JacobianResult neutral_jacobian<Extended>(const OrbitSegment&, const JacobianOptions&);
template JacobianResult neutral_jacobian<Deep>(const OrbitSegment&, const JacobianOptions&);

namespace {

std::string format_tol(double tol) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.0e", tol);
  return buf;
}

}  // namespace

SegmentAnalysis analyze_segment(const OrbitSegment& seg, const NeutralOptions& opt, JacobianMode jacobian,
                                const JacobianOptions& jopt) {
  SegmentAnalysis out;
  out.scheme = summarize(scheme_of(seg));
  const NeutralBasis basis = neutral_direct(seg, opt);
  const AdvanceSystem system = advance_system(seg, opt);
  out.dim_direct = basis.dim;
  out.dim_cpf = system.dim_neutral;
  out.dim_alpha = system.dim_alpha;
  out.equations = system.equations;
  out.cpf_residual = cpf_verify(seg, basis);
  out.advance_residual = advance_residual(system, basis);
  if (jacobian != JacobianMode::Off) {
    const JacobianResult jr = jacobian == JacobianMode::Double     ? neutral_jacobian<double>(seg, jopt)
                              : jacobian == JacobianMode::Extended ? neutral_jacobian<Extended>(seg, jopt)
                                                                   : neutral_jacobian<Deep>(seg, jopt);
    out.dim_jacobian = jr.dim;
    out.dim_endpoint = jr.dim_endpoint;
  }
  out.methods_agree = out.dim_direct == out.dim_cpf && (!out.dim_jacobian || *out.dim_jacobian == out.dim_direct);
  if (!out.methods_agree) {
    std::string sweep = "rank_tol sweep (direct/advance):";
    for (double tol : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
      NeutralOptions o = opt;
      o.rank_tol = tol;
      sweep += " " + format_tol(tol) + ":" + std::to_string(neutral_direct(seg, o).dim) + "/" +
               std::to_string(advance_system(seg, o).dim_neutral);
    }
    out.diagnostic = sweep;
  }
  out.sufficient = out.dim_direct == seg.params.dim + 1;
  return out;
}

bool is_sufficient(const OrbitSegment& seg, const NeutralOptions& opt) {
  const int direct = neutral_direct(seg, opt).dim;
  const int cpf = advance_system(seg, opt).dim_neutral;
  if (direct != cpf)
    throw Error(ErrorCode::MethodDisagreement, "direct kernel dim " + std::to_string(direct) +
                                                   " but advance system gives " + std::to_string(cpf));
  return direct == seg.params.dim + 1;
}

}  // namespace hardball
