#include "folner/group.hpp"

#include <algorithm>
#include <unordered_map>

namespace folner {

using detail::checked_add;
using detail::checked_mul;
using detail::checked_sub;

Matrix Matrix::identity(int d) {
  Matrix m;
  m.d = d;
  m.a.assign((std::size_t)d * d, 0);
  for (int i = 0; i < d; ++i) m.at(i, i) = 1;
  return m;
}

bool Matrix::is_identity() const {
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (at(r, c) != (r == c ? 1 : 0)) return false;
  return true;
}

Matrix mat_mul(const Matrix& x, const Matrix& y) {
  if (x.d != y.d) throw ContextMismatch("matrix dimension mismatch");
  Matrix out;
  out.d = x.d;
  out.a.assign((std::size_t)x.d * x.d, 0);
  for (int r = 0; r < x.d; ++r)
    for (int c = 0; c < x.d; ++c) {
      Coord acc = 0;
      for (int k = 0; k < x.d; ++k)
        acc = checked_add(acc, checked_mul(x.at(r, k), y.at(k, c)));
      out.at(r, c) = acc;
    }
  return out;
}

Vec mat_apply(const Matrix& m, const Vec& v) {
  if ((int)v.size() != m.d) throw ContextMismatch("matrix/vector dimension mismatch");
  Vec out(v.size(), 0);
  for (int r = 0; r < m.d; ++r) {
    Coord acc = 0;
    for (int c = 0; c < m.d; ++c) acc = checked_add(acc, checked_mul(m.at(r, c), v[c]));
    out[r] = acc;
  }
  return out;
}

// Bareiss fraction-free elimination; exact for integer matrices.
Coord mat_det(const Matrix& m) {
  int n = m.d;
  if (n == 0) return 1;
  std::vector<__int128> a(m.a.begin(), m.a.end());
  auto at = [&](int r, int c) -> __int128& { return a[(std::size_t)r * n + c]; };
  __int128 prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (at(i, k) != 0) {
          piv = i;
          break;
        }
      if (piv < 0) return 0;
      for (int c = 0; c < n; ++c) std::swap(at(k, c), at(piv, c));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    prev = at(k, k);
  }
  __int128 det = at(n - 1, n - 1) * sign;
  if (det > INT64_MAX || det < INT64_MIN) throw OverflowError("determinant exceeds int64");
  return (Coord)det;
}

Matrix mat_inverse_unimodular(const Matrix& m) {
  Coord det = mat_det(m);
  if (det != 1 && det != -1)
    throw PreconditionError("matrix is not invertible over the integers (det " +
                            std::to_string(det) + ")");
  int n = m.d;
  std::vector<Rational> a((std::size_t)n * 2 * n);
  auto at = [&](int r, int c) -> Rational& { return a[(std::size_t)r * 2 * n + c]; };
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) at(r, c) = Rational::integer(m.at(r, c));
    at(r, n + r) = Rational::integer(1);
  }
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    for (int i = k; i < n; ++i)
      if (at(i, k) != Rational()) {
        piv = i;
        break;
      }
    for (int c = 0; c < 2 * n; ++c) std::swap(at(k, c), at(piv, c));
    Rational p = at(k, k);
    for (int c = 0; c < 2 * n; ++c) at(k, c) = at(k, c) / p;
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      Rational f = at(i, k);
      if (f == Rational()) continue;
      for (int c = 0; c < 2 * n; ++c) at(i, c) = at(i, c) - f * at(k, c);
    }
  }
  Matrix inv;
  inv.d = n;
  inv.a.assign((std::size_t)n * n, 0);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      Rational v = at(r, n + c);
      if (v.den() != 1) throw PreconditionError("unimodular inverse is not integral");
      inv.at(r, c) = v.num();
    }
  return inv;
}

std::size_t ElementHash::operator()(const GroupElement& e) const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix((std::uint64_t)e.z);
  for (Coord c : e.h) mix((std::uint64_t)c);
  return (std::size_t)h;
}

GroupContext GroupContext::zd(int d) {
  if (d < 1) throw ParseError("free-abelian rank must be positive");
  GroupContext ctx;
  ctx.kind_ = GroupKind::Zd;
  ctx.d_ = d;
  return ctx;
}

GroupContext GroupContext::finite(std::vector<std::vector<int>> table) {
  int n = (int)table.size();
  if (n < 1) throw ParseError("empty multiplication table");
  if (n > 1024) throw ParseError("multiplication table too large");
  for (const auto& row : table) {
    if ((int)row.size() != n) throw ParseError("multiplication table is not square");
    for (int v : row)
      if (v < 0 || v >= n) throw ParseError("multiplication table entry out of range");
  }
  int e = -1;
  for (int i = 0; i < n && e < 0; ++i) {
    bool ok = true;
    for (int x = 0; x < n && ok; ++x)
      ok = table[i][x] == x && table[x][i] == x;
    if (ok) e = i;
  }
  if (e < 0) throw ParseError("multiplication table has no identity");
  std::vector<int> inv(n, -1);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y)
      if (table[x][y] == e && table[y][x] == e) {
        inv[x] = y;
        break;
      }
    if (inv[x] < 0) throw ParseError("multiplication table has a non-invertible element");
  }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (table[table[x][y]][z] != table[x][table[y][z]])
          throw ParseError("multiplication table is not associative");
  GroupContext ctx;
  ctx.kind_ = GroupKind::Finite;
  ctx.d_ = 1;
  ctx.table_ = std::move(table);
  ctx.inv_table_ = std::move(inv);
  ctx.e_index_ = e;
  return ctx;
}

GroupContext GroupContext::semidirect(int d, Matrix alpha) {
  if (d < 1) throw ParseError("free-abelian rank must be positive");
  if (alpha.d != d || (int)alpha.a.size() != d * d)
    throw ParseError("automorphism matrix has wrong shape");
  GroupContext ctx;
  ctx.kind_ = GroupKind::Semidirect;
  ctx.d_ = d;
  ctx.alpha_inv_ = mat_inverse_unimodular(alpha);
  ctx.alpha_ = std::move(alpha);
  ctx.alpha_identity_ = ctx.alpha_.is_identity();
  ctx.power_cache_.emplace(0, Matrix::identity(d));
  return ctx;
}

const Matrix& GroupContext::alpha_matrix() const {
  if (kind_ != GroupKind::Semidirect)
    throw PreconditionError("context has no automorphism");
  return alpha_;
}

const std::vector<std::vector<int>>& GroupContext::table() const {
  if (kind_ != GroupKind::Finite)
    throw PreconditionError("context has no multiplication table");
  return table_;
}

int GroupContext::order() const {
  if (kind_ != GroupKind::Finite)
    throw PreconditionError("context is not finite");
  return (int)table_.size();
}

GroupElement GroupContext::identity() const {
  GroupElement e;
  if (kind_ == GroupKind::Finite) {
    e.h.assign(1, e_index_);
  } else {
    e.h.assign(d_, 0);
  }
  return e;
}

GroupElement GroupContext::element(Vec h, Coord z) const {
  if (kind_ == GroupKind::Finite) {
    if (h.size() != 1 || z != 0 || h[0] < 0 || h[0] >= (Coord)table_.size())
      throw ParseError("bad finite-group element");
  } else {
    if ((int)h.size() != d_) throw ParseError("element has wrong rank");
    if (z != 0 && kind_ != GroupKind::Semidirect)
      throw ParseError("nonzero g-power outside a semidirect context");
  }
  GroupElement e;
  e.h = std::move(h);
  e.z = z;
  return e;
}

const Matrix& GroupContext::alpha_power(Coord i) const {
  if (kind_ != GroupKind::Semidirect)
    throw PreconditionError("context has no automorphism");
  if (alpha_identity_) i = 0;
  auto it = power_cache_.find(i);
  if (it != power_cache_.end()) return it->second;
  Coord step = i > 0 ? 1 : -1;
  const Matrix& factor = i > 0 ? alpha_ : alpha_inv_;
  Coord j = 0;
  auto nearest = power_cache_.find(i - step);
  while (nearest == power_cache_.end()) {
    j += step;
    nearest = power_cache_.find(i - step - j);
    if (std::abs(i - step - j) > (Coord)1e7)
      throw OverflowError("alpha power cache walk failed");
  }
  Matrix cur = nearest->second;
  for (Coord k = i - step - j; k != i; k += step) {
    cur = mat_mul(cur, factor);
    power_cache_.emplace(k + step, cur);
  }
  return power_cache_.find(i)->second;
}

Vec GroupContext::alpha_apply(Coord i, const Vec& h) const {
  if (kind_ != GroupKind::Semidirect)
    throw PreconditionError("context has no automorphism");
  if (i == 0 || alpha_identity_) return h;
  return mat_apply(alpha_power(i), h);
}

GroupElement GroupContext::compose(const GroupElement& a, const GroupElement& b) const {
  switch (kind_) {
    case GroupKind::Zd: {
      if ((int)a.h.size() != d_ || (int)b.h.size() != d_ || a.z != 0 || b.z != 0)
        throw ContextMismatch("element does not belong to this context");
      GroupElement out;
      out.h.resize(d_);
      for (int i = 0; i < d_; ++i) out.h[i] = checked_add(a.h[i], b.h[i]);
      return out;
    }
    case GroupKind::Finite: {
      if (a.h.size() != 1 || b.h.size() != 1 || a.z != 0 || b.z != 0)
        throw ContextMismatch("element does not belong to this context");
      Coord x = a.h[0], y = b.h[0];
      if (x < 0 || x >= (Coord)table_.size() || y < 0 || y >= (Coord)table_.size())
        throw ContextMismatch("element does not belong to this context");
      GroupElement out;
      out.h.assign(1, table_[(std::size_t)x][(std::size_t)y]);
      return out;
    }
    case GroupKind::Semidirect: {
      if ((int)a.h.size() != d_ || (int)b.h.size() != d_)
        throw ContextMismatch("element does not belong to this context");
      GroupElement out;
      Vec bh = alpha_apply(a.z, b.h);
      out.h.resize(d_);
      for (int i = 0; i < d_; ++i) out.h[i] = checked_add(a.h[i], bh[i]);
      out.z = checked_add(a.z, b.z);
      return out;
    }
  }
  throw Error("unreachable");
}

GroupElement GroupContext::inverse(const GroupElement& a) const {
  switch (kind_) {
    case GroupKind::Zd: {
      if ((int)a.h.size() != d_ || a.z != 0)
        throw ContextMismatch("element does not belong to this context");
      GroupElement out;
      out.h.resize(d_);
      for (int i = 0; i < d_; ++i) out.h[i] = checked_sub(0, a.h[i]);
      return out;
    }
    case GroupKind::Finite: {
      if (a.h.size() != 1 || a.z != 0 || a.h[0] < 0 || a.h[0] >= (Coord)table_.size())
        throw ContextMismatch("element does not belong to this context");
      GroupElement out;
      out.h.assign(1, inv_table_[(std::size_t)a.h[0]]);
      return out;
    }
    case GroupKind::Semidirect: {
      if ((int)a.h.size() != d_)
        throw ContextMismatch("element does not belong to this context");
      GroupElement out;
      Vec th = alpha_apply(-a.z, a.h);
      out.h.resize(d_);
      for (int i = 0; i < d_; ++i) out.h[i] = checked_sub(0, th[i]);
      out.z = checked_sub(0, a.z);
      return out;
    }
  }
  throw Error("unreachable");
}

bool GroupContext::operator==(const GroupContext& o) const {
  if (kind_ != o.kind_ || d_ != o.d_) return false;
  if (kind_ == GroupKind::Finite) return table_ == o.table_;
  if (kind_ == GroupKind::Semidirect) return alpha_ == o.alpha_;
  return true;
}

FiniteSubset::FiniteSubset(std::vector<GroupElement> elems) : elems_(std::move(elems)) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

FiniteSubset::FiniteSubset(std::initializer_list<GroupElement> elems)
    : FiniteSubset(std::vector<GroupElement>(elems)) {}

FiniteSubset FiniteSubset::from_sorted(std::vector<GroupElement> elems) {
  FiniteSubset s;
  s.elems_ = std::move(elems);
  return s;
}

bool FiniteSubset::contains(const GroupElement& e) const {
  return std::binary_search(elems_.begin(), elems_.end(), e);
}

FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b) {
  std::vector<GroupElement> out;
  out.reserve(a.elements().size() + b.elements().size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset::from_sorted(std::move(out));
}

FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b) {
  std::vector<GroupElement> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset::from_sorted(std::move(out));
}

FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b) {
  std::vector<GroupElement> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset::from_sorted(std::move(out));
}

bool is_subset(const FiniteSubset& a, const FiniteSubset& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool are_disjoint(const FiniteSubset& a, const FiniteSubset& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else
      return false;
  }
  return true;
}

FiniteSubset product_set(const GroupContext& ctx, const FiniteSubset& A,
                         const FiniteSubset& B) {
  std::vector<GroupElement> out;
  out.reserve(A.elements().size() * B.elements().size());
  for (const auto& a : A)
    for (const auto& b : B) out.push_back(ctx.compose(a, b));
  return FiniteSubset(std::move(out));
}

FiniteSubset inverse_set(const GroupContext& ctx, const FiniteSubset& A) {
  std::vector<GroupElement> out;
  out.reserve(A.elements().size());
  for (const auto& a : A) out.push_back(ctx.inverse(a));
  return FiniteSubset(std::move(out));
}

FiniteSubset translate_left(const GroupContext& ctx, const GroupElement& a,
                            const FiniteSubset& F) {
  std::vector<GroupElement> out;
  out.reserve(F.elements().size());
  for (const auto& f : F) out.push_back(ctx.compose(a, f));
  return FiniteSubset(std::move(out));
}

FiniteSubset translate_right(const GroupContext& ctx, const FiniteSubset& F,
                             const GroupElement& s) {
  std::vector<GroupElement> out;
  out.reserve(F.elements().size());
  for (const auto& f : F) out.push_back(ctx.compose(f, s));
  return FiniteSubset(std::move(out));
}

FiniteSubset apply_alpha_power(const GroupContext& ctx, Coord i, const FiniteSubset& F) {
  if (ctx.kind() != GroupKind::Semidirect)
    throw PreconditionError("context has no automorphism");
  std::vector<GroupElement> out;
  out.reserve(F.elements().size());
  for (const auto& f : F) {
    if (f.z != 0) throw PreconditionError("alpha applies to subsets of H only");
    GroupElement e;
    e.h = ctx.alpha_apply(i, f.h);
    out.push_back(std::move(e));
  }
  FiniteSubset r(std::move(out));
  if (r.size() != F.size()) throw ContractViolation("automorphism collapsed elements");
  return r;
}

FiniteSubset h_box(const GroupContext& ctx, const Vec& lo, const Vec& hi) {
  int d = ctx.rank();
  if (ctx.kind() == GroupKind::Finite) throw PreconditionError("boxes need a free-abelian H");
  if ((int)lo.size() != d || (int)hi.size() != d) throw ParseError("box corner has wrong rank");
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) return {};
    std::size_t ext = (std::size_t)(hi[i] - lo[i] + 1);
    if (ext > (std::size_t)1e9 / std::max<std::size_t>(total, 1))
      throw OverflowError("box too large");
    total *= ext;
  }
  std::vector<GroupElement> out;
  out.reserve(total);
  Vec cur = lo;
  while (true) {
    GroupElement e;
    e.h = cur;
    out.push_back(std::move(e));
    int axis = d - 1;
    while (axis >= 0) {
      if (cur[axis] < hi[axis]) {
        ++cur[axis];
        break;
      }
      cur[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return FiniteSubset::from_sorted(std::move(out));
}

FiniteSubset g_interval(const GroupContext& ctx, Coord zlo, Coord zhi) {
  if (ctx.kind() != GroupKind::Semidirect)
    throw PreconditionError("g-intervals need a semidirect context");
  if (zlo > zhi) return {};
  std::vector<GroupElement> out;
  out.reserve((std::size_t)(zhi - zlo + 1));
  for (Coord z = zlo; z <= zhi; ++z) {
    GroupElement e;
    e.h.assign(ctx.rank(), 0);
    e.z = z;
    out.push_back(std::move(e));
  }
  return FiniteSubset::from_sorted(std::move(out));
}

namespace {

// Grid fast path for Z^d contexts (d <= 2) when K is a full box: counts
// |Kt n F| by prefix sums over the bounding box. Returns false when the
// shapes do not qualify, leaving the generic path to run.
bool boundary_grid(const GroupContext& ctx, const FiniteSubset& K,
                   const FiniteSubset& F, std::vector<GroupElement>* out,
                   std::int64_t* count_only) {
  if (ctx.kind() == GroupKind::Finite) return false;
  int d = ctx.rank();
  if (d > 2) return false;
  for (const auto& e : K)
    if (e.z != 0) return false;
  const auto& fe = F.elements();
  if (fe.front().z != 0 || fe.back().z != 0) return false;
  if (ctx.kind() == GroupKind::Semidirect) {
    // Mixed z-levels fall back; the all-z-0 case behaves like Z^d.
    for (const auto& e : fe)
      if (e.z != 0) return false;
  }

  Vec klo = K.elements().front().h, khi = klo;
  for (const auto& e : K)
    for (int i = 0; i < d; ++i) {
      klo[i] = std::min(klo[i], e.h[i]);
      khi[i] = std::max(khi[i], e.h[i]);
    }
  std::size_t kcells = 1;
  for (int i = 0; i < d; ++i) kcells *= (std::size_t)(khi[i] - klo[i] + 1);
  if ((std::int64_t)kcells != K.size()) return false;  // not a full box

  Vec flo = fe.front().h, fhi = flo;
  for (const auto& e : fe)
    for (int i = 0; i < d; ++i) {
      flo[i] = std::min(flo[i], e.h[i]);
      fhi[i] = std::max(fhi[i], e.h[i]);
    }
  // t range: K^-1 F bounding box.
  Vec tlo(d, 0), thi(d, 0);
  std::size_t fcells = 1, tcells = 1;
  for (int i = 0; i < d; ++i) {
    tlo[i] = checked_sub(flo[i], khi[i]);
    thi[i] = checked_sub(fhi[i], klo[i]);
    std::size_t fx = (std::size_t)(fhi[i] - flo[i] + 1);
    std::size_t tx = (std::size_t)(thi[i] - tlo[i] + 1);
    if (fx > 2e7 / std::max<std::size_t>(fcells, 1)) return false;
    if (tx > 2e7 / std::max<std::size_t>(tcells, 1)) return false;
    fcells *= fx;
    tcells *= tx;
  }

  std::int64_t n0 = fhi[0] - flo[0] + 1;
  std::int64_t n1 = d == 2 ? (fhi[1] - flo[1] + 1) : 1;
  // prefix[i][j] = #F in [flo0..flo0+i-1] x [flo1..flo1+j-1]
  std::vector<std::int32_t> prefix((std::size_t)(n0 + 1) * (n1 + 1), 0);
  auto pref = [&](std::int64_t i, std::int64_t j) -> std::int32_t& {
    return prefix[(std::size_t)i * (n1 + 1) + j];
  };
  for (const auto& e : fe) {
    std::int64_t i = e.h[0] - flo[0];
    std::int64_t j = d == 2 ? e.h[1] - flo[1] : 0;
    pref(i + 1, j + 1) = 1;
  }
  for (std::int64_t i = 1; i <= n0; ++i)
    for (std::int64_t j = 1; j <= n1; ++j)
      pref(i, j) += pref(i - 1, j) + pref(i, j - 1) - pref(i - 1, j - 1);
  auto rect = [&](std::int64_t a0, std::int64_t b0, std::int64_t a1,
                  std::int64_t b1) -> std::int64_t {
    a0 = std::max(a0, flo[0]);
    b0 = std::min(b0, fhi[0]);
    a1 = std::max(a1, d == 2 ? flo[1] : 0);
    b1 = std::min(b1, d == 2 ? fhi[1] : 0);
    if (a0 > b0 || a1 > b1) return 0;
    std::int64_t i0 = a0 - flo[0], i1 = b0 - flo[0] + 1;
    std::int64_t j0 = d == 2 ? a1 - flo[1] : 0, j1 = d == 2 ? b1 - flo[1] + 1 : 1;
    return pref(i1, j1) - pref(i0, j1) - pref(i1, j0) + pref(i0, j0);
  };

  std::int64_t ksize = K.size();
  std::int64_t found = 0;
  Coord t1lo = d == 2 ? tlo[1] : 0, t1hi = d == 2 ? thi[1] : 0;
  for (Coord t0 = tlo[0]; t0 <= thi[0]; ++t0)
    for (Coord t1 = t1lo; t1 <= t1hi; ++t1) {
      std::int64_t c = rect(t0 + klo[0], t0 + khi[0], d == 2 ? t1 + klo[1] : 0,
                            d == 2 ? t1 + khi[1] : 0);
      if (c >= 1 && c < ksize) {
        ++found;
        if (out) {
          GroupElement e;
          e.h.push_back(t0);
          if (d == 2) e.h.push_back(t1);
          out->push_back(std::move(e));
        }
      }
    }
  if (count_only) *count_only = found;
  return true;
}

void boundary_generic(const GroupContext& ctx, const FiniteSubset& K,
                      const FiniteSubset& F, std::vector<GroupElement>* out,
                      std::int64_t* count_only) {
  std::unordered_map<GroupElement, std::int64_t, ElementHash> cnt;
  cnt.reserve(F.elements().size() * 2);
  for (const auto& k : K) {
    GroupElement kinv = ctx.inverse(k);
    for (const auto& f : F) cnt[ctx.compose(kinv, f)]++;
  }
  std::int64_t ksize = K.size();
  std::int64_t found = 0;
  for (auto& [t, c] : cnt) {
    if (c < ksize) {
      ++found;
      if (out) out->push_back(t);
    }
  }
  if (count_only) *count_only = found;
}

}  // namespace

FiniteSubset k_boundary(const GroupContext& ctx, const FiniteSubset& K,
                        const FiniteSubset& F) {
  if (K.empty()) throw PreconditionError("k_boundary: K must be nonempty");
  if (F.empty()) return {};
  std::vector<GroupElement> out;
  if (boundary_grid(ctx, K, F, &out, nullptr))
    return FiniteSubset::from_sorted(std::move(out));
  boundary_generic(ctx, K, F, &out, nullptr);
  return FiniteSubset(std::move(out));
}

std::int64_t k_boundary_size(const GroupContext& ctx, const FiniteSubset& K,
                             const FiniteSubset& F) {
  if (K.empty()) throw PreconditionError("k_boundary: K must be nonempty");
  if (F.empty()) return 0;
  std::int64_t n = 0;
  if (boundary_grid(ctx, K, F, nullptr, &n)) return n;
  boundary_generic(ctx, K, F, nullptr, &n);
  return n;
}

InvarianceResult check_invariance(const GroupContext& ctx, const FiniteSubset& K,
                                  const Rational& delta, const FiniteSubset& F) {
  if (F.empty()) throw PreconditionError("check_invariance: F must be nonempty");
  InvarianceResult r;
  r.boundary_size = k_boundary_size(ctx, K, F);
  r.set_size = F.size();
  r.invariant = delta.le_times(r.boundary_size, r.set_size);
  return r;
}

}  // namespace folner
