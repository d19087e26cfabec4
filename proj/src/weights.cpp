#include "bellopt/weights.hpp"

#include <algorithm>
#include <bit>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace bellopt {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::resource_limit: return "resource_limit";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::not_square: return "not_square";
    case ErrorCode::bad_entry_value: return "bad_entry_value";
    case ErrorCode::bad_support_count: return "bad_support_count";
    case ErrorCode::reducible: return "reducible";
    case ErrorCode::even_minus_count: return "even_minus_count";
  }
  return "unknown";
}

WeightMatrix::WeightMatrix(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() < 2 || m_.cols() < 2) {
    std::ostringstream os;
    os << "weight matrix must be at least 2x2, got " << m_.rows() << "x"
       << m_.cols();
    throw Error(ErrorCode::invalid_input, os.str());
  }
  if (!m_.allFinite())
    throw Error(ErrorCode::invalid_input, "weight matrix has non-finite entries");
  op_norm_ = spectral_norm(m_);
  schmidt_norm_ = m_.norm();
}

WeightMatrix chsh_weight() {
  Matrix m(2, 2);
  m << 1, 1, 1, -1;
  return WeightMatrix(m);
}

WeightMatrix magic3_weight() {
  Matrix m(3, 3);
  m << 8, 3, 4, 1, 5, 9, 6, 7, 2;
  return WeightMatrix(m);
}

WeightMatrix w00_weight() {
  const Matrix w0 = chsh_weight().matrix();
  return WeightMatrix(kron(w0, w0));
}

BoxBounds unit_box(Index n) { return BoxBounds(std::size_t(n), Interval{}); }

double operator_norm(const WeightMatrix& w) { return w.op_norm(); }

namespace {

// Enumerates b in {-1,1}^m with b(0) = +1 in Gray-code order and keeps the
// corner maximizing ||W b||_1. `w` has m <= rows columns.
CornerPair corner_search(const Matrix& w) {
  const Index m = w.cols();
  Vector b = Vector::Ones(m);
  Vector v = w * b;
  Vector best_b = b;
  double best = v.lpNorm<1>();
  const std::uint64_t count = std::uint64_t{1} << (m - 1);
  for (std::uint64_t t = 1; t < count; ++t) {
    const Index k = Index(std::countr_zero(t)) + 1;
    b(k) = -b(k);
    if ((t & 0xfff) == 0)
      v.noalias() = w * b;  // bound accumulated rounding
    else
      v += (2.0 * b(k)) * w.col(k);
    const double value = v.lpNorm<1>();
    if (value > best) {
      best = value;
      best_b = b;
    }
  }
  CornerPair out;
  const Vector wb = w * best_b;
  out.a = wb.unaryExpr([](double x) { return x >= 0 ? 1.0 : -1.0; });
  out.b = best_b;
  out.value = out.a.dot(wb);
  return out;
}

void check_bounds(const BoxBounds& bounds, Index n, const char* side) {
  if (Index(bounds.size()) != n) {
    std::ostringstream os;
    os << side << " bounds have " << bounds.size() << " entries, expected " << n;
    throw Error(ErrorCode::invalid_input, os.str());
  }
  for (const auto& iv : bounds) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw Error(ErrorCode::invalid_input,
                  std::string("malformed ") + side + " interval");
  }
}

}  // namespace

CornerPair hv_norm_argmax(const WeightMatrix& w, int cap) {
  const bool flip = w.cols() > w.rows();
  const Index side = std::min(w.rows(), w.cols());
  if (side > cap) {
    std::ostringstream os;
    os << "hidden-variable norm needs 2^" << side - 1
       << " corner evaluations; smaller side exceeds the cap of " << cap
       << " (transpose does not help: both sides are too large)";
    throw Error(ErrorCode::resource_limit, os.str());
  }
  if (!flip) return corner_search(w.matrix());
  CornerPair t = corner_search(w.matrix().transpose());
  std::swap(t.a, t.b);
  t.value = t.a.dot(w.matrix() * t.b);
  return t;
}

double hv_norm(const WeightMatrix& w, int cap) {
  return hv_norm_argmax(w, cap).value;
}

double hv_box_norm(const WeightMatrix& w, const BoxBounds& a_bounds,
                   const BoxBounds& b_bounds, int cap) {
  check_bounds(a_bounds, w.rows(), "a");
  check_bounds(b_bounds, w.cols(), "b");

  const bool flip = w.cols() > w.rows();
  const Matrix m = flip ? Matrix(w.matrix().transpose()) : w.matrix();
  const BoxBounds& outer = flip ? b_bounds : a_bounds;  // chosen greedily
  const BoxBounds& inner = flip ? a_bounds : b_bounds;  // enumerated
  const Index n = m.cols();
  if (n > cap)
    throw Error(ErrorCode::resource_limit,
                "box norm enumeration exceeds the corner cap");

  Vector b(n);
  for (Index k = 0; k < n; ++k) b(k) = inner[std::size_t(k)].lo;
  Vector v = m * b;
  std::vector<bool> high(std::size_t(n), false);

  auto evaluate = [&](const Vector& wb) {
    double hi = 0, lo = 0;
    for (Index j = 0; j < wb.size(); ++j) {
      const auto& iv = outer[std::size_t(j)];
      const double x = iv.lo * wb(j), y = iv.hi * wb(j);
      hi += std::max(x, y);
      lo += std::min(x, y);
    }
    return std::max(hi, -lo);
  };

  double best = evaluate(v);
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t t = 1; t < count; ++t) {
    const auto k = std::size_t(std::countr_zero(t));
    const auto& iv = inner[k];
    const double old = b(Index(k));
    high[k] = !high[k];
    b(Index(k)) = high[k] ? iv.hi : iv.lo;
    if ((t & 0xfff) == 0)
      v.noalias() = m * b;
    else
      v += (b(Index(k)) - old) * m.col(Index(k));
    best = std::max(best, evaluate(v));
  }
  return best;
}

double BellMatrix::expected_norm(Index n) {
  return 2.0 * std::cos(std::numbers::pi / (2.0 * double(n)));
}

BellMatrix validate_bell_matrix(const WeightMatrix& w) {
  const Matrix& m = w.matrix();
  if (m.rows() != m.cols())
    throw Error(ErrorCode::not_square, "Bell matrix must be square");
  const Index n = m.rows();

  int minus = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double x = m(i, j);
      if (x != 0.0 && x != 1.0 && x != -1.0) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") = " << x << " is not in {0,1,-1}";
        throw Error(ErrorCode::bad_entry_value, os.str());
      }
      if (x == -1.0) ++minus;
    }

  for (Index i = 0; i < n; ++i) {
    const auto row_support = (m.row(i).array() != 0.0).count();
    const auto col_support = (m.col(i).array() != 0.0).count();
    if (row_support != 2 || col_support != 2) {
      std::ostringstream os;
      os << "row/column " << i << " has " << row_support << "/" << col_support
         << " non-zero entries, expected 2";
      throw Error(ErrorCode::bad_support_count, os.str());
    }
  }

  // Connectivity of the bipartite row/column support graph. With two entries
  // per line this implies strong connectivity of the j->k digraph and rules
  // out any block form under independent row and column permutations.
  std::vector<bool> seen(std::size_t(2 * n), false);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Index reached = 1;
  while (!frontier.empty()) {
    const Index node = frontier.front();
    frontier.pop();
    const bool is_row = node < n;
    const Index line = is_row ? node : node - n;
    for (Index other = 0; other < n; ++other) {
      const double x = is_row ? m(line, other) : m(other, line);
      if (x == 0.0) continue;
      const Index next = is_row ? other + n : other;
      if (!seen[std::size_t(next)]) {
        seen[std::size_t(next)] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  if (reached != 2 * n)
    throw Error(ErrorCode::reducible, "Bell matrix support is reducible");

  if (minus % 2 == 0)
    throw Error(ErrorCode::even_minus_count,
                "Bell matrix has an even number of minus signs");

  return BellMatrix(w, minus);
}

BellMatrix canonical_z0(Index n) {
  if (n < 2) throw Error(ErrorCode::invalid_input, "Z0 order must be >= 2");
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = 1;
  m(0, 0) = -1;
  m(n - 1, n - 1) = 1;
  return validate_bell_matrix(WeightMatrix(m));
}

BellMatrix generate_bell_matrix(Index n, std::uint64_t seed) {
  const Matrix z = canonical_z0(n).matrix();
  Rng rng = derive_rng(seed, {std::uint64_t(n), 0xbe11});
  std::vector<Index> pr(static_cast<std::size_t>(n)), pc(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pr[std::size_t(i)] = pc[std::size_t(i)] = i;
  std::shuffle(pr.begin(), pr.end(), rng);
  std::shuffle(pc.begin(), pc.end(), rng);
  std::bernoulli_distribution coin(0.5);
  Vector sr(n), sc(n);
  for (Index i = 0; i < n; ++i) sr(i) = coin(rng) ? -1.0 : 1.0;
  for (Index i = 0; i < n; ++i) sc(i) = coin(rng) ? -1.0 : 1.0;

  Matrix x(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      x(pr[std::size_t(i)], pc[std::size_t(j)]) = sr(i) * sc(j) * z(i, j) + 0.0;
  return validate_bell_matrix(WeightMatrix(x));
}

Matrix SignedPermutation::matrix() const {
  const auto n = Index(target.size());
  Matrix p = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s)
    p(target[std::size_t(s)], s) = sign[std::size_t(s)];
  return p;
}

bool SignedPermutation::is_identity() const {
  for (std::size_t s = 0; s < target.size(); ++s)
    if (target[s] != Index(s) || sign[s] != 1) return false;
  return true;
}

Matrix Z0Reduction::row_matrix() const { return rows.matrix(); }
Matrix Z0Reduction::col_matrix() const { return cols.matrix().transpose(); }

namespace {

struct SupportCycle {
  std::vector<Index> rows;  // rows[t] shares column cols[t] with rows[t+1]
  std::vector<Index> cols;
};

// Walks the single 2N-cycle of a Bell matrix support graph starting at row 0
// and its lower-indexed column.
SupportCycle walk_cycle(const Matrix& m) {
  const Index n = m.rows();
  auto other_col = [&](Index row, Index not_col) {
    for (Index j = 0; j < n; ++j)
      if (j != not_col && m(row, j) != 0.0) return j;
    return Index(-1);
  };
  auto other_row = [&](Index col, Index not_row) {
    for (Index i = 0; i < n; ++i)
      if (i != not_row && m(i, col) != 0.0) return i;
    return Index(-1);
  };
  SupportCycle c;
  Index row = 0;
  Index col = other_col(0, -1);
  for (Index t = 0; t < n; ++t) {
    c.rows.push_back(row);
    c.cols.push_back(col);
    row = other_row(col, row);
    col = other_col(row, col);
  }
  return c;
}

}  // namespace

Z0Reduction reduce_to_z0(const BellMatrix& bell) {
  const Matrix& x = bell.matrix();
  const Index n = bell.order();
  const Matrix z = canonical_z0(n).matrix();
  const SupportCycle cx = walk_cycle(x);
  const SupportCycle cz = walk_cycle(z);

  Z0Reduction out;
  out.rows.target.assign(std::size_t(n), 0);
  out.rows.sign.assign(std::size_t(n), 1);
  out.cols.target.assign(std::size_t(n), 0);
  out.cols.sign.assign(std::size_t(n), 1);

  int row_sign = 1;
  for (Index t = 0; t < n; ++t) {
    const auto tt = std::size_t(t);
    const Index xr = cx.rows[tt], xc = cx.cols[tt];
    const Index zr = cz.rows[tt], zc = cz.cols[tt];
    out.rows.target[std::size_t(xr)] = zr;
    out.rows.sign[std::size_t(xr)] = row_sign;
    out.cols.target[std::size_t(xc)] = zc;
    const int col_sign = int(z(zr, zc) * x(xr, xc)) * row_sign;
    out.cols.sign[std::size_t(xc)] = col_sign;
    if (t + 1 < n) {
      const Index xr2 = cx.rows[tt + 1], zr2 = cz.rows[tt + 1];
      row_sign = int(z(zr2, zc) * x(xr2, xc)) * col_sign;
    }
  }

  const Matrix check = out.row_matrix() * x * out.col_matrix();
  if (check != z)
    throw Error(ErrorCode::numeric, "signed permutation reduction failed");
  return out;
}

std::optional<SignaturePair> zero_gap_certificate(const WeightMatrix& w,
                                                  double tol, int cap) {
  const Index na = w.rows(), nb = w.cols();
  if (na + nb > cap) {
    std::ostringstream os;
    os << "zero-gap certificate search over N_a + N_b = " << na + nb
       << " signs exceeds the cap of " << cap;
    throw Error(ErrorCode::resource_limit, os.str());
  }
  const Matrix& m = w.matrix();
  const double norm = w.op_norm();
  const double row_target = std::sqrt(double(nb) / double(na)) * norm;
  const double col_target = std::sqrt(double(na) / double(nb)) * norm;
  const double slack = tol * std::max(w.dim_scale() * norm, 1.0);

  // Signs are enumerated lexicographically with +1 before -1 and d2(0) = +1;
  // d1 is then forced by the signs of the row sums of W D2.
  const std::uint64_t count = std::uint64_t{1} << (nb - 1);
  Vector d2(nb);
  for (std::uint64_t code = 0; code < count; ++code) {
    for (Index k = 0; k < nb; ++k) {
      const Index bit = nb - 1 - k;
      d2(k) = (k > 0 && ((code >> bit) & 1)) ? -1.0 : 1.0;
    }
    const Vector r = m * d2;
    bool ok = true;
    for (Index i = 0; i < na && ok; ++i)
      ok = std::abs(std::abs(r(i)) - row_target) <= slack;
    if (!ok) continue;
    const Vector d1 = r.unaryExpr([](double x) { return x >= 0 ? 1.0 : -1.0; });
    const Vector c = d2.cwiseProduct(m.transpose() * d1);
    for (Index k = 0; k < nb && ok; ++k)
      ok = std::abs(c(k) - col_target) <= slack;
    if (!ok) continue;
    SignaturePair pair;
    for (Index i = 0; i < na; ++i) pair.d1.push_back(int(d1(i)));
    for (Index k = 0; k < nb; ++k) pair.d2.push_back(int(d2(k)));
    return pair;
  }
  return std::nullopt;
}

GapReport quantum_gap(const WeightMatrix& w, double tol) {
  GapReport r;
  r.op_norm = w.op_norm();
  if (r.op_norm == 0.0)
    throw Error(ErrorCode::invalid_input,
                "scaled quantum gap is undefined for W = 0");
  r.hv_norm = hv_norm(w);
  r.absolute_gap = w.dim_scale() * r.op_norm - r.hv_norm;
  r.scaled_gap = w.dim_scale() - r.hv_norm / r.op_norm;
  if (w.rows() + w.cols() <= kCertificateEnumerationCap &&
      r.absolute_gap <= std::max(tol, 1e-6) * w.dim_scale() * r.op_norm)
    r.certificate = zero_gap_certificate(w, tol);
  return r;
}

double grothendieck_bound(Index n) {
  if (n < 2) throw Error(ErrorCode::invalid_input, "K_G(N) needs N >= 2");
  switch (n) {
    case 2: return std::numbers::sqrt2;
    case 3: return 1.5163;
    case 4: return std::numbers::pi / 2.0;
    default: return std::numbers::pi / (2.0 * std::log(1.0 + std::numbers::sqrt2));
  }
}

TheoremBounds theorem_bounds(const WeightMatrix& w) {
  TheoremBounds b;
  b.bell_threshold = hv_norm(w);
  b.thm1 = w.dim_scale() * w.op_norm();
  b.thm2 = grothendieck_bound(std::max(w.rows(), w.cols())) * b.bell_threshold;
  return b;
}

GapSampler::GapSampler(Index rows, Index cols, std::uint64_t seed,
                       EntryDistribution dist)
    : rows_(rows), cols_(cols), dist_(dist), rng_(derive_rng(seed, {0x9a9})) {
  if (rows < 2 || cols < 2)
    throw Error(ErrorCode::invalid_input, "sampled weights must be at least 2x2");
}

GapSample GapSampler::next() {
  Matrix m(rows_, cols_);
  if (dist_ == EntryDistribution::uniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng_);
  } else {
    std::normal_distribution<double> g(0.0, 1.0);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng_);
  }
  WeightMatrix w(std::move(m));
  const double g = w.dim_scale() - hv_norm(w) / w.op_norm();
  return {std::move(w), g};
}

std::vector<GapSample> sample_gap_distribution(Index rows, Index cols,
                                               std::size_t count,
                                               std::uint64_t seed,
                                               EntryDistribution dist) {
  std::vector<GapSample> out;
  if (count == 0) return out;
  GapSampler sampler(rows, cols, seed, dist);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.next());
  return out;
}

}  // namespace bellopt
