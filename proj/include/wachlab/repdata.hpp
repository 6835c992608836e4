#pragma once

// The matrix model of crystalline representations: a RepSpec is the datum
// (p, a, f, d, embedded Hodge polygon k, unit matrices A_j), one matrix per
// embedding j in Z/aZ, with Mat(phi|_{L_j}) = A_j Delta_{k_j}.  Parabolic
// equivalence A'_j = C_{j-1}^{-1} A_j C_j^flat preserves the representation.

#include "wachlab/polygons.hpp"

#include <numeric>
#include <optional>
#include <random>

namespace wachlab {

struct RepSpec {
    FieldCtxPtr ctx;
    int d = 0;
    EmbeddedHodge k;
    std::vector<Mat<UnramElem>> A;  // a matrices, each d x d in GL_d(O_E)

    int a() const { return (int)A.size(); }

    void validate() const {
        if (!ctx) throw input_error("RepSpec: missing context");
        if ((int)A.size() != ctx->a) throw input_error("RepSpec: need one matrix per embedding");
        k.validate();
        if (k.a() != ctx->a || k.d() != d) throw input_error("RepSpec: Hodge polygon shape mismatch");
        if (!k.effective()) throw input_error("RepSpec: Hodge rows must be effective (k_{j,d} >= 0)");
        for (const auto& m : A) {
            if (m.rows != d || m.cols != d) throw input_error("RepSpec: matrix dimension mismatch");
            if (!det(m).is_unit()) throw input_error("RepSpec: A_j must lie in GL_d(O_E)");
        }
    }

    Mat<UnramElem> delta(int j) const { return delta_matrix(ctx, k.k[j]); }

    // Normalize to k_{j,d} = 0 by an unramified-determinant twist; returns the
    // twist exponents w_j = k_{j,d} that were subtracted from each row.
    std::pair<RepSpec, std::vector<long long>> normalized_effective() const {
        RepSpec s = *this;
        std::vector<long long> tw(k.a(), 0);
        for (int j = 0; j < k.a(); ++j) {
            tw[j] = k.k[j].back();
            for (auto& x : s.k.k[j]) x -= tw[j];
        }
        return {s, tw};
    }
};

// phi^a-matrix: P_{(j),A} = A_{j+1} Delta_{k_{j+1}} ... A_j Delta_{k_j}
// (indices mod a, in that order; phi acts on E-coefficients as identity here).
inline Mat<UnramElem> phi_power(const RepSpec& spec, int j = 0) {
    const int a = spec.a();
    Mat<UnramElem> P = Mat<UnramElem>::identity(spec.d, spec.ctx->zero());
    for (int l = 0; l < a; ++l) {
        int idx = ((j + 1 + l) % a + a) % a;
        P = P * (spec.A[idx] * spec.delta(idx));
    }
    return P;
}

// sigma-invariant Newton polygon: (1/a) NP(phi^a | D_0).
inline Polygon sigma_np(const RepSpec& spec) {
    auto c = char_poly(phi_power(spec, 0));
    Polygon np = newton_of_char_poly(c);
    return np.scaled(Rat(1, spec.a()));
}

// t_H = sum_i kbar_i; t_N = (1/a) ord_p det(phi^a | D_0).
inline std::pair<Rat, Rat> t_invariants(const RepSpec& spec) {
    Rat tH(0);
    for (const auto& kb : spec.k.sigma_invariant()) tH = tH + kb;
    Mat<UnramElem> P = phi_power(spec, 0);
    UnramElem dp = det(P);
    int v = dp.valuation();
    if (v >= spec.ctx->N) throw precision_error("t_invariants: det phi^a vanishes at precision");
    Rat tN = Rat(v, spec.a());
    return {tH, tN};
}

// ---------------------------------------------------------------------------
// Parabolic group with respect to a Hodge row: block upper-triangular with
// invertible diagonal blocks, blocks given by the multiplicities of the row.

inline std::vector<int> parabolic_blocks(const std::vector<long long>& krow) {
    std::vector<int> blocks;
    int run = 1;
    for (size_t i = 1; i < krow.size(); ++i) {
        if (krow[i] == krow[i - 1])
            ++run;
        else {
            blocks.push_back(run);
            run = 1;
        }
    }
    blocks.push_back(run);
    return blocks;
}

inline bool in_parabolic(const Mat<UnramElem>& C, const std::vector<long long>& krow) {
    const int d = C.rows;
    if ((int)krow.size() != d) return false;
    // zero below the block diagonal, unit-determinant diagonal blocks
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j)
            if (krow[j] != krow[i] && !C.at(i, j).is_zero()) return false;
    auto blocks = parabolic_blocks(krow);
    int off = 0;
    for (int b : blocks) {
        Mat<UnramElem> sub(b, b, C.data[0].zero_like());
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j) sub.at(i, j) = C.at(off + i, off + j);
        if (!det(sub).is_unit()) return false;
        off += b;
    }
    return true;
}

// C^flat = Delta_k C Delta_k^{-1} = (p^{k_i - k_j} c_{ij}).  Entries below
// the block structure are exactly zero for parabolic C, so no division ever
// happens; a nonzero entry there means C was not parabolic.
inline Mat<UnramElem> flat(const Mat<UnramElem>& C, const std::vector<long long>& krow) {
    const int d = C.rows;
    Mat<UnramElem> r = C;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            long long e = krow[i] - krow[j];
            if (e >= 0)
                r.at(i, j) = C.at(i, j).times_pk((int)e);
            else {
                if (!C.at(i, j).is_zero()) throw math_error("flat: entry leaves O_E (not parabolic)");
                r.at(i, j) = C.at(i, j).zero_like();
            }
        }
    return r;
}

// Inverse of a GL_d(O_E) matrix via adjugate / unit determinant.
inline Mat<UnramElem> invert_gl(const Mat<UnramElem>& m) {
    UnramElem dm = det(m);
    if (!dm.is_unit()) throw math_error("invert_gl: determinant is not a unit");
    return adjugate(m) * dm.invert();
}

// A'_j = C_{j-1}^{-1} A_j C_j^flat; sigma_linear applies sigma to C_j^flat
// (the a = 1 view).
inline RepSpec apply_equiv(const RepSpec& spec, const std::vector<Mat<UnramElem>>& C, bool sigma_linear = false) {
    const int a = spec.a();
    if ((int)C.size() != a) throw input_error("apply_equiv: need one C per embedding");
    for (int j = 0; j < a; ++j)
        if (!in_parabolic(C[j], spec.k.k[j])) throw math_error("apply_equiv: C_j not in the parabolic group");
    RepSpec out = spec;
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        Mat<UnramElem> cf = flat(C[j], spec.k.k[j]);
        if (sigma_linear) cf = cf.map([](const UnramElem& e) { return e.frobenius(1); });
        out.A[j] = invert_gl(C[jm1]) * spec.A[j] * cf;
    }
    return out;
}

namespace detail {

// Stable permutation sorting values non-increasing; returns index order.
inline std::vector<int> sort_perm_desc(const std::vector<long long>& v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return v[x] > v[y]; });
    return idx;
}

// permutation matrix Q with Q(r, i) = [r == perm[i]]; Q^{-1} = Q^T
inline Mat<UnramElem> perm_matrix(const std::vector<int>& perm, const FieldCtxPtr& ctx) {
    int n = (int)perm.size();
    Mat<UnramElem> q = Mat<UnramElem>::zero(n, n, ctx->zero());
    for (int i = 0; i < n; ++i) q.at(perm[i], i) = ctx->one();
    return q;
}

}  // namespace detail

// Block-diagonal sum with Hodge rows merged and re-sorted non-increasing.
// Re-sorting is a per-embedding change of adapted basis, so the matrices
// transform as A''_j = Q_{j-1}^T (A_j (+) A'_j) Q_j with the row-j sorting
// permutations Q_j.
inline RepSpec direct_sum(const RepSpec& s1, const RepSpec& s2) {
    if (s1.ctx.get() != s2.ctx.get()) throw input_error("direct_sum: context mismatch");
    const int a = s1.a();
    RepSpec out;
    out.ctx = s1.ctx;
    out.d = s1.d + s2.d;
    out.k.k.resize(a);
    std::vector<Mat<UnramElem>> Q;
    for (int j = 0; j < a; ++j) {
        std::vector<long long> merged = s1.k.k[j];
        merged.insert(merged.end(), s2.k.k[j].begin(), s2.k.k[j].end());
        auto perm = detail::sort_perm_desc(merged);
        std::vector<long long> sorted(merged.size());
        for (size_t i = 0; i < merged.size(); ++i) sorted[i] = merged[perm[i]];
        out.k.k[j] = sorted;
        Q.push_back(detail::perm_matrix(perm, s1.ctx));
    }
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        out.A.push_back(Q[jm1].transpose() * block_diag(s1.A[j], s2.A[j]) * Q[j]);
    }
    out.validate();
    return out;
}

// Kronecker product with pairwise-summed Hodge rows re-sorted the same way.
inline RepSpec tensor(const RepSpec& s1, const RepSpec& s2) {
    if (s1.ctx.get() != s2.ctx.get()) throw input_error("tensor: context mismatch");
    const int a = s1.a();
    RepSpec out;
    out.ctx = s1.ctx;
    out.d = s1.d * s2.d;
    out.k.k.resize(a);
    std::vector<Mat<UnramElem>> Q;
    for (int j = 0; j < a; ++j) {
        std::vector<long long> merged;
        for (int i = 0; i < s1.d; ++i)
            for (int i2 = 0; i2 < s2.d; ++i2) merged.push_back(s1.k.k[j][i] + s2.k.k[j][i2]);
        auto perm = detail::sort_perm_desc(merged);
        std::vector<long long> sorted(merged.size());
        for (size_t i = 0; i < merged.size(); ++i) sorted[i] = merged[perm[i]];
        out.k.k[j] = sorted;
        Q.push_back(detail::perm_matrix(perm, s1.ctx));
    }
    for (int j = 0; j < a; ++j) {
        int jm1 = (j + a - 1) % a;
        out.A.push_back(Q[jm1].transpose() * kron(s1.A[j], s2.A[j]) * Q[j]);
    }
    out.validate();
    return out;
}

// max_j |A_j - A'_j|_p on the given representatives, as the valuation
// min_j ord_p(A_j - A'_j); nullopt means the specs agree at precision
// (distance 0).
inline std::optional<int> rep_distance_ord(const RepSpec& s1, const RepSpec& s2) {
    if (s1.d != s2.d || s1.a() != s2.a()) throw input_error("rep_distance: shape mismatch");
    int v = s1.ctx->N;
    for (int j = 0; j < s1.a(); ++j) {
        Mat<UnramElem> diff = s1.A[j] - s2.A[j];
        for (const auto& e : diff.data) v = std::min(v, e.valuation());
    }
    if (v >= s1.ctx->N) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Bounded-precision equivalence search: exhaustive over C_j in P_{k_j} mod
// p^n, witnessing A'_j == C_{j-1}^{-1} A_j C_j^flat mod p^n (checked as
// C_{j-1} A'_j == A_j C_j^flat, avoiding the inversion).  Test oracle,
// intended for p = 3, d = 2, n <= 2, a <= 2.

struct EquivWitness {
    std::vector<Mat<UnramElem>> C;
};

namespace detail {

// enumerate all of P_{krow} mod p^n for d = 2
inline std::vector<Mat<UnramElem>> enumerate_parabolic2(const FieldCtxPtr& ctxn, const std::vector<long long>& krow) {
    std::vector<Mat<UnramElem>> out;
    std::vector<UnramElem> all, units;
    // all residues of the (small) ring
    std::vector<BigInt> digits(ctxn->f, BigInt(0));
    BigInt total = 1;
    for (int i = 0; i < ctxn->f; ++i) total *= ctxn->pN;
    if (total > 2000000) throw math_error("equiv_search: budget exceeded");
    for (BigInt w = 0; w < total; ++w) {
        BigInt t = w;
        std::vector<BigInt> c(ctxn->f);
        for (int i = 0; i < ctxn->f; ++i) {
            c[i] = t % ctxn->pN;
            t /= ctxn->pN;
        }
        UnramElem e = ctxn->from_coeffs(c);
        all.push_back(e);
        if (e.is_unit()) units.push_back(e);
    }
    if (krow[0] == krow[1]) {
        for (const auto& a : all)
            for (const auto& b : all)
                for (const auto& c : all)
                    for (const auto& d : all) {
                        Mat<UnramElem> m(2, 2, ctxn->zero());
                        m.at(0, 0) = a;
                        m.at(0, 1) = b;
                        m.at(1, 0) = c;
                        m.at(1, 1) = d;
                        if (det(m).is_unit()) out.push_back(m);
                    }
    } else {
        for (const auto& a : units)
            for (const auto& b : all)
                for (const auto& d : units) {
                    Mat<UnramElem> m(2, 2, ctxn->zero());
                    m.at(0, 0) = a;
                    m.at(0, 1) = b;
                    m.at(1, 1) = d;
                    out.push_back(m);
                }
    }
    return out;
}

}  // namespace detail

namespace detail {

// Given F claimed to equal flat(C) mod p^n, recover the parabolic C: diagonal
// blocks are copied, above-block entries c satisfy p^e c == F_ij and are
// determined mod p^{n-e} with p^{ef} lifts each.  Returns nullopt when no C
// exists (divisibility or invertibility fails).
struct UnflatResult {
    Mat<UnramElem> base;
    std::vector<std::pair<int, int>> free_pos;  // positions needing lift enumeration
    std::vector<int> free_exp;                  // c determined mod p^{n-e}; e = exponent here
};

inline std::optional<UnflatResult> unflatten(const Mat<UnramElem>& F, const std::vector<long long>& krow,
                                             const FieldCtxPtr& ctxn) {
    const int d = F.rows;
    UnflatResult r{Mat<UnramElem>(d, d, ctxn->zero()), {}, {}};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            long long e = krow[i] - krow[j];
            if (i > j && e != 0) {
                if (!F.at(i, j).is_zero()) return std::nullopt;  // below-block must vanish
            } else if (e == 0) {
                r.base.at(i, j) = F.at(i, j);
            } else {  // i < j impossible (krow non-increasing), so i above block: e > 0
                int ee = (int)std::min<long long>(e, ctxn->N);
                if (F.at(i, j).valuation() < ee) return std::nullopt;
                if (ee >= ctxn->N) {
                    r.base.at(i, j) = ctxn->zero();
                    r.free_pos.push_back({i, j});
                    r.free_exp.push_back(ctxn->N);
                } else {
                    r.base.at(i, j) = F.at(i, j).div_pk(ee);
                    r.free_pos.push_back({i, j});
                    r.free_exp.push_back(ee);
                }
            }
        }
    if (!in_parabolic(r.base, krow)) return std::nullopt;
    return r;
}

}  // namespace detail

// Exhaustive search for a witness tuple making A2_j == C_{j-1}^{-1} A1_j
// C_j^flat mod p^n.  The equations are linear in the C-tuple: only the C_0
// fiber is enumerated; C_1, ..., C_{a-1} are propagated via
// C_j^flat = A1_j^{-1} C_{j-1} A2_j, with ambiguous above-block digits
// enumerated before the wrap-around check.
inline std::optional<EquivWitness> equiv_search(const RepSpec& s1, const RepSpec& s2, int n,
                                                long long budget = 40000000) {
    if (s1.d != 2 || s2.d != 2) throw input_error("equiv_search: d = 2 only");
    if (s1.a() != s2.a() || s1.k.k != s2.k.k) throw input_error("equiv_search: shape mismatch");
    auto ctxn = s1.ctx->with_precision(n);
    const int a = s1.a();
    std::vector<Mat<UnramElem>> A1(a, Mat<UnramElem>(2, 2, ctxn->zero())), A2 = A1, A1inv = A1;
    for (int j = 0; j < a; ++j) {
        A1[j] = s1.A[j].map([&](const UnramElem& e) { return e.reduced_to(ctxn); });
        A2[j] = s2.A[j].map([&](const UnramElem& e) { return e.reduced_to(ctxn); });
        A1inv[j] = invert_gl(A1[j]);
    }
    auto fiber = detail::enumerate_parabolic2(ctxn, s1.k.k[0]);
    if ((long long)fiber.size() > budget) throw math_error("equiv_search: budget exceeded");

    long long checked = 0;
    for (const auto& C0 : fiber) {
        Mat<UnramElem> C0flat = flat(C0, s1.k.k[0]);
        // propagate with lift enumeration, depth-first over embeddings
        struct Frame {
            std::vector<Mat<UnramElem>> C;
        };
        std::function<std::optional<EquivWitness>(int, std::vector<Mat<UnramElem>>&)> go =
            [&](int j, std::vector<Mat<UnramElem>>& Cs) -> std::optional<EquivWitness> {
            if (++checked > budget) throw math_error("equiv_search: budget exceeded");
            if (j == a) {
                // wrap: C_{a-1} A2_0 == A1_0 C0flat
                if (Cs[a - 1] * A2[0] == A1[0] * C0flat) {
                    EquivWitness w;
                    w.C = Cs;
                    return w;
                }
                return std::nullopt;
            }
            Mat<UnramElem> Fj = A1inv[j] * Cs[j - 1] * A2[j];
            auto un = detail::unflatten(Fj, s1.k.k[j], ctxn);
            if (!un) return std::nullopt;
            // enumerate lifts of ambiguous digits
            std::vector<BigInt> units_mod;  // residue steps per free entry
            std::function<std::optional<EquivWitness>(size_t)> lifts = [&](size_t fi) -> std::optional<EquivWitness> {
                if (fi == un->free_pos.size()) {
                    Cs[j] = un->base;
                    // restore already-set base (it is mutated through recursion)
                    return go(j + 1, Cs);
                }
                auto [pi, pj] = un->free_pos[fi];
                int e = un->free_exp[fi];
                BigInt pe = pow_big(ctxn->p, e);
                BigInt pstep = ctxn->pN / pe;  // lift step p^{n-e}
                // iterate over all f-coordinate lift offsets t*p^{n-e}, t in [0, p^e)^f
                std::vector<BigInt> t(ctxn->f, BigInt(0));
                UnramElem saved = un->base.at(pi, pj);
                for (;;) {
                    std::vector<BigInt> coeffs = saved.c;
                    for (int ci = 0; ci < ctxn->f; ++ci) coeffs[ci] = mod_reduce(coeffs[ci] + t[ci] * pstep, ctxn->pN);
                    un->base.at(pi, pj) = ctxn->from_coeffs(coeffs);
                    if (auto w = lifts(fi + 1)) return w;
                    int pos = 0;
                    while (pos < ctxn->f) {
                        if (++t[pos] < pe) break;
                        t[pos] = 0;
                        ++pos;
                    }
                    if (pos >= ctxn->f) break;
                }
                un->base.at(pi, pj) = saved;
                return std::nullopt;
            };
            return lifts(0);
        };
        std::vector<Mat<UnramElem>> Cs(a, Mat<UnramElem>(2, 2, ctxn->zero()));
        Cs[0] = C0;
        if (a == 1) {
            if (C0 * A2[0] == A1[0] * C0flat) {
                EquivWitness w;
                w.C = {C0};
                return w;
            }
        } else {
            if (auto w = go(1, Cs)) return w;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Random generators for test corpora (seeded via WACHLAB_SEED).

inline Mat<UnramElem> random_gl(const FieldCtxPtr& ctx, int d, std::mt19937_64& rng) {
    for (;;) {
        Mat<UnramElem> m(d, d, ctx->zero());
        for (auto& e : m.data) e = random_elem(ctx, rng);
        if (det(m).is_unit()) return m;
    }
}

inline RepSpec random_spec2(const FieldCtxPtr& ctx, long long kmax, std::mt19937_64& rng, long long kmin = 0) {
    RepSpec s;
    s.ctx = ctx;
    s.d = 2;
    s.k.k.resize(ctx->a);
    for (int j = 0; j < ctx->a; ++j) s.k.k[j] = {kmin + (long long)(rng() % (unsigned long long)(kmax - kmin + 1)), 0};
    for (int j = 0; j < ctx->a; ++j) s.A.push_back(random_gl(ctx, 2, rng));
    s.validate();
    return s;
}

inline std::vector<Mat<UnramElem>> random_parabolic_tuple(const RepSpec& spec, std::mt19937_64& rng) {
    std::vector<Mat<UnramElem>> C;
    for (int j = 0; j < spec.a(); ++j) {
        const auto& krow = spec.k.k[j];
        const auto& ctx = spec.ctx;
        Mat<UnramElem> m(spec.d, spec.d, ctx->zero());
        auto blocks = parabolic_blocks(krow);
        int off = 0;
        for (int b : blocks) {
            // random invertible diagonal block
            for (;;) {
                Mat<UnramElem> sub(b, b, ctx->zero());
                for (auto& e : sub.data) e = random_elem(ctx, rng);
                if (det(sub).is_unit()) {
                    for (int i = 0; i < b; ++i)
                        for (int jj = 0; jj < b; ++jj) m.at(off + i, off + jj) = sub.at(i, jj);
                    break;
                }
            }
            off += b;
        }
        // free entries above the block diagonal
        for (int i = 0; i < spec.d; ++i)
            for (int jj = i + 1; jj < spec.d; ++jj)
                if (krow[i] != krow[jj]) m.at(i, jj) = random_elem(ctx, rng);
        C.push_back(m);
    }
    return C;
}

}  // namespace wachlab
