#pragma once

// Newton and Hodge polygons: lower convex hulls of valuations, elementary
// divisors of matrices over O_E by local Smith reduction, embedded and
// sigma-invariant polygons, and the t_N/t_H weak-admissibility quantities.

#include "wachlab/field.hpp"
#include "wachlab/matrix.hpp"

#include <optional>

namespace wachlab {

// Non-increasing slope sequence with multiplicities.
struct Polygon {
    std::vector<std::pair<Rat, long long>> slopes;  // (slope, multiplicity)

    long long length() const {
        long long n = 0;
        for (const auto& s : slopes) n += s.second;
        return n;
    }
    Rat total() const {
        Rat t(0);
        for (const auto& s : slopes) t = t + s.first * Rat(s.second);
        return t;
    }
    std::vector<Rat> expanded() const {
        std::vector<Rat> r;
        for (const auto& s : slopes)
            for (long long i = 0; i < s.second; ++i) r.push_back(s.first);
        return r;
    }
    bool contains_slope(const Rat& x) const {
        for (const auto& s : slopes)
            if (s.first == x) return true;
        return false;
    }
    Polygon scaled(const Rat& f) const {
        Polygon r = *this;
        for (auto& s : r.slopes) s.first = s.first * f;
        return r;
    }
    friend bool operator==(const Polygon& x, const Polygon& y) { return x.slopes == y.slopes; }
};

inline Polygon polygon_from_vals(std::vector<Rat> v) {
    std::sort(v.begin(), v.end(), [](const Rat& x, const Rat& y) { return y < x; });
    Polygon poly;
    for (const auto& x : v) {
        if (!poly.slopes.empty() && poly.slopes.back().first == x)
            poly.slopes.back().second += 1;
        else
            poly.slopes.push_back({x, 1});
    }
    return poly;
}

struct ValPoint {
    long long idx;
    long long val;
    bool at_least = false;  // true: only "val >= this" is known
};

// Root valuations of a polynomial from the lower convex hull of its
// coefficient valuations: for a hull segment (i1,v1)-(i2,v2) there are
// i2-i1 roots of valuation (v1-v2)/(i2-i1); listed non-increasing.
inline Polygon newton_from_valuations(const std::vector<ValPoint>& points) {
    if (points.empty()) throw input_error("newton_from_valuations: empty input");
    std::vector<ValPoint> pts = points;
    std::sort(pts.begin(), pts.end(), [](const ValPoint& a, const ValPoint& b) { return a.idx < b.idx; });
    if (pts.front().at_least || pts.back().at_least)
        throw precision_error("newton_from_valuations: endpoints must be exactly known");

    // lower hull over exactly-known points
    std::vector<ValPoint> known;
    for (const auto& q : pts)
        if (!q.at_least) known.push_back(q);
    std::vector<ValPoint> hull;
    for (const auto& q : known) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            // keep b only if it is strictly below segment a-q
            // cross: (b-a) x (q-a) <= 0 means b on/above the a-q chord
            __int128 cr = (__int128)(b.idx - a.idx) * (q.val - a.val) - (__int128)(b.val - a.val) * (q.idx - a.idx);
            if (cr <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(q);
    }
    auto hull_at = [&](long long x) -> Rat {
        for (size_t i = 0; i + 1 < hull.size(); ++i) {
            if (x >= hull[i].idx && x <= hull[i + 1].idx) {
                long long dx = hull[i + 1].idx - hull[i].idx;
                return Rat(hull[i].val) + Rat(hull[i + 1].val - hull[i].val, dx) * Rat(x - hull[i].idx);
            }
        }
        return Rat(hull.back().val);
    };
    // "at least" points must not be able to dip below the hull
    for (const auto& q : pts)
        if (q.at_least && Rat(q.val) < hull_at(q.idx))
            throw precision_error("newton_from_valuations: precision insufficient for hull");

    Polygon poly;
    std::vector<Rat> vals;
    for (size_t i = 0; i + 1 < hull.size(); ++i) {
        long long run = hull[i + 1].idx - hull[i].idx;
        Rat rv = Rat(hull[i].val - hull[i + 1].val, run);
        for (long long t = 0; t < run; ++t) vals.push_back(rv);
    }
    return polygon_from_vals(std::move(vals));
}

// Characteristic polynomial coefficients c_0..c_d (c_d = 1) via principal
// minors: coefficient of X^{d-i} = (-1)^i * sum of principal i x i minors.
inline std::vector<UnramElem> char_poly(const Mat<UnramElem>& m) {
    if (m.rows != m.cols) throw input_error("char_poly: square matrix required");
    const int d = m.rows;
    const auto& ctx = m.data[0].ctx;
    std::vector<UnramElem> c(d + 1, ctx->zero());
    c[d] = ctx->one();
    // iterate over nonempty subsets of {0..d-1}
    std::vector<int> idx;
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
        idx.clear();
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        int i = (int)idx.size();
        Mat<UnramElem> sub((int)idx.size(), (int)idx.size(), ctx->zero());
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t s = 0; s < idx.size(); ++s) sub.at((int)r, (int)s) = m.at(idx[r], idx[s]);
        UnramElem dd = det(sub);
        if (i % 2 == 1) dd = -dd;
        c[d - i] += dd;
    }
    return c;
}

inline Polygon newton_of_char_poly(const std::vector<UnramElem>& c) {
    const auto& ctx = c[0].ctx;
    std::vector<ValPoint> pts;
    for (size_t i = 0; i < c.size(); ++i) {
        int v = c[i].valuation();
        pts.push_back(ValPoint{(long long)i, (long long)v, v >= ctx->N});
    }
    return newton_from_valuations(pts);
}

// Elementary-divisor valuations by p-adic Smith reduction with deterministic
// pivoting (lowest valuation, then lexicographic position); non-increasing.
inline Polygon matrix_hodge(Mat<UnramElem> m) {
    if (m.rows != m.cols) throw input_error("matrix_hodge: square matrix required");
    const int d = m.rows;
    const auto& ctx = m.data[0].ctx;
    {
        UnramElem dm = det(m);
        if (dm.valuation() >= ctx->N) throw precision_error("matrix_hodge: determinant vanishes at precision");
    }
    std::vector<Rat> vals;
    for (int s = 0; s < d; ++s) {
        int best_v = ctx->N + 1, bi = -1, bj = -1;
        for (int i = s; i < d; ++i)
            for (int j = s; j < d; ++j) {
                int v = m.at(i, j).valuation();
                if (v < best_v) {
                    best_v = v;
                    bi = i;
                    bj = j;
                }
            }
        if (bi < 0 || best_v > ctx->N) throw precision_error("matrix_hodge: precision exhausted");
        // swap into place
        for (int j = 0; j < d; ++j) std::swap(m.at(s, j), m.at(bi, j));
        for (int i = 0; i < d; ++i) std::swap(m.at(i, s), m.at(i, bj));
        UnramElem uinv = m.at(s, s).div_pk(best_v).invert();
        for (int i = s + 1; i < d; ++i) {
            if (m.at(i, s).is_zero()) continue;
            UnramElem q = m.at(i, s).div_pk(best_v) * uinv;
            for (int j = s; j < d; ++j) m.at(i, j) -= q * m.at(s, j);
        }
        for (int j = s + 1; j < d; ++j) {
            if (m.at(s, j).is_zero()) continue;
            UnramElem q = m.at(s, j).div_pk(best_v) * uinv;
            for (int i = s; i < d; ++i) m.at(i, j) -= q * m.at(i, s);
        }
        vals.push_back(Rat((long long)best_v));
    }
    return polygon_from_vals(std::move(vals));
}

// Embedded Hodge polygon: a rows of d non-increasing integers.
struct EmbeddedHodge {
    std::vector<std::vector<long long>> k;  // k[j][i], row j in Z/aZ

    int a() const { return (int)k.size(); }
    int d() const { return k.empty() ? 0 : (int)k[0].size(); }

    void validate() const {
        if (k.empty()) throw input_error("EmbeddedHodge: empty");
        for (const auto& row : k) {
            if (row.size() != k[0].size()) throw input_error("EmbeddedHodge: ragged rows");
            for (size_t i = 0; i + 1 < row.size(); ++i)
                if (row[i] < row[i + 1]) throw input_error("EmbeddedHodge: rows must be non-increasing");
        }
    }
    bool effective() const {
        for (const auto& row : k)
            if (row.back() < 0) return false;
        return true;
    }
    // kbar_i = (1/a) sum_j k[j][i], non-increasing with denominators | a
    std::vector<Rat> sigma_invariant() const {
        std::vector<Rat> r(d(), Rat(0));
        for (int i = 0; i < d(); ++i) {
            long long s = 0;
            for (int j = 0; j < a(); ++j) s += k[j][i];
            r[i] = Rat(s, a());
        }
        return r;
    }
    Rat kbar1() const { return sigma_invariant()[0]; }
    long long row_sum(int j) const {
        long long s = 0;
        for (long long x : k[j]) s += x;
        return s;
    }
    long long total() const {
        long long s = 0;
        for (int j = 0; j < a(); ++j) s += row_sum(j);
        return s;
    }
};

// Diag(p^{k_{j,1}}, ..., p^{k_{j,d}})
inline Mat<UnramElem> delta_matrix(const FieldCtxPtr& ctx, const std::vector<long long>& krow) {
    Mat<UnramElem> m = Mat<UnramElem>::zero((int)krow.size(), (int)krow.size(), ctx->zero());
    for (size_t i = 0; i < krow.size(); ++i) {
        if (krow[i] < 0) throw input_error("delta_matrix: negative weight");
        m.at((int)i, (int)i) = ctx->one().times_pk((int)krow[i]);
    }
    return m;
}

// Newton lies on or above Hodge with equal endpoints, for non-increasing
// slope listings: prefix sums of NP <= prefix sums of HP, totals equal.
inline bool np_above_hp(const Polygon& np, const Polygon& hp) {
    auto nv = np.expanded(), hv = hp.expanded();
    if (nv.size() != hv.size()) return false;
    Rat sn(0), sh(0);
    for (size_t i = 0; i < nv.size(); ++i) {
        sn = sn + nv[i];
        sh = sh + hv[i];
        if (i + 1 < nv.size() && sh < sn) return false;
    }
    return sn == sh;
}

}  // namespace wachlab
