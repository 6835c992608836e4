#pragma once

// Mod-p reduction of integral Wach modules to etale (phi,Gamma)-modules over
// F_{p^f}((pi)) and the classification of 2-dimensional semisimplifications:
// fundamental-character exponents from determinant valuations, theorem-backed
// family labels, and a sound-but-incomplete phi-stable-line search with
// explicit Gamma-stability verification.

#include "wachlab/families.hpp"

namespace wachlab {

// Laurent series over the residue field F_{p^f} = ctx(N=1): pi^{off} * ser,
// with len valid coefficients starting at pi^{off}.
struct LaurentModP {
    int off = 0;
    int len = 0;
    TruncSeries ser;  // over a ctx with N = 1; coefficients beyond len are padding

    LaurentModP() = default;
    LaurentModP(int off_, TruncSeries s, int len_) : off(off_), len(len_), ser(std::move(s)) {}

    static LaurentModP zero(const FieldCtxPtr& ctx1, int M) { return LaurentModP(0, TruncSeries::zero(ctx1, M), M); }
    static LaurentModP from_poly(const TruncSeries& s) { return LaurentModP(0, s, s.M); }

    LaurentModP zero_like() const { return LaurentModP(0, ser.zero_like(), ser.M); }
    LaurentModP one_like() const { return LaurentModP(0, TruncSeries::one(ser.ctx, ser.M), ser.M); }

    bool is_zero() const {
        for (int s = 0; s < len; ++s)
            if (!ser.a[s].is_zero()) return false;
        return true;
    }
    // pi-order; nullopt when zero to the valid precision
    std::optional<int> order() const {
        for (int s = 0; s < len; ++s)
            if (!ser.a[s].is_zero()) return off + s;
        return std::nullopt;
    }
    LaurentModP normalized() const {
        auto o = order();
        if (!o) return LaurentModP(0, ser.zero_like(), len);
        int shift = *o - off;
        LaurentModP r(*o, ser.zero_like(), len - shift);
        for (int s = 0; s + shift < ser.M && s + shift < len; ++s) r.ser.a[s] = ser.a[s + shift];
        return r;
    }

    friend LaurentModP operator*(const LaurentModP& x, const LaurentModP& y) {
        LaurentModP r(x.off + y.off, x.ser * y.ser, std::min(x.len, y.len));
        return r;
    }
    friend LaurentModP operator+(const LaurentModP& x, const LaurentModP& y) {
        if (x.is_zero()) return y;
        if (y.is_zero()) return x;
        int off = std::min(x.off, y.off);
        int len = std::min(x.off + x.len, y.off + y.len) - off;
        if (len <= 0) throw precision_error("LaurentModP: addition lost all precision");
        LaurentModP r(off, x.ser.zero_like(), len);
        for (int s = 0; s < len; ++s) {
            UnramElem c = r.ser.ctx->zero();
            int xi = off + s - x.off, yi = off + s - y.off;
            if (xi >= 0 && xi < x.ser.M) c += x.ser.a[xi];
            if (yi >= 0 && yi < y.ser.M) c += y.ser.a[yi];
            r.ser.a[s] = c;
        }
        return r;
    }
    friend LaurentModP operator-(const LaurentModP& x, const LaurentModP& y) {
        LaurentModP ny = y;
        for (auto& c : ny.ser.a) c = -c;
        return x + ny;
    }
    LaurentModP& operator+=(const LaurentModP& y) { return *this = *this + y; }
    LaurentModP& operator-=(const LaurentModP& y) { return *this = *this - y; }
    LaurentModP& operator*=(const LaurentModP& y) { return *this = *this * y; }

    // multiplicative inverse of a nonzero element (order may be nonzero)
    LaurentModP inverted() const {
        LaurentModP n = normalized();
        if (n.is_zero()) throw math_error("LaurentModP: inverting zero");
        TruncSeries unitpart = n.ser.truncated_to(std::max(n.len, 1)).widened_to(n.ser.M);
        return LaurentModP(-n.off, unitpart.invert_unit(), n.len);
    }
};

// phi-bar: sigma on coefficients, pi -> pi^p, stretching the window.
inline LaurentModP phi_modp(const LaurentModP& x, int power = 1) {
    const auto& ctx1 = x.ser.ctx;
    long long p = ctx1->p;
    long long pp = 1;
    for (int i = 0; i < power; ++i) pp *= p;
    LaurentModP r((int)(x.off * pp), x.ser.zero_like(), x.ser.M);
    r.len = (int)std::min<long long>((long long)x.ser.M, (long long)x.len * pp);
    for (long long s = 0; s < x.len; ++s) {
        if (s * pp >= x.ser.M) break;
        r.ser.a[(size_t)(s * pp)] = x.ser.a[(size_t)s].frobenius(power);
    }
    return r;
}

// gamma-bar: coefficients fixed, pi -> (1+pi)^{c} - 1 mod p (computed from
// the base-p digits of c), with Laurent offsets handled via the inverse of
// gamma(pi).
inline TruncSeries gamma_pi_modp(const FieldCtxPtr& ctx1, int M, const GammaChar& g) {
    // (1+pi)^c = prod_i (1+pi^{p^i})^{d_i} mod p for c = sum d_i p^i
    int digits_needed = 1;
    long long t = 1;
    while (t < M) {
        t *= ctx1->p;
        ++digits_needed;
    }
    BigInt cc = g.c;
    bool neg = false;
    if (cc < 0) {
        neg = true;
        cc = -cc;
    }
    TruncSeries r = TruncSeries::one(ctx1, M);
    BigInt rem = cc;
    long long pk = 1;
    for (int i = 0; i <= digits_needed && pk < M; ++i) {
        long long di = (long long)(rem % ctx1->p);
        rem /= ctx1->p;
        if (di != 0) {
            // (1 + pi^{p^i})^{d_i}
            TruncSeries base = TruncSeries::one(ctx1, M);
            if (pk < M) base.a[(size_t)pk] = ctx1->one();
            for (long long rpt = 0; rpt < di; ++rpt) r = r * base;
        }
        pk *= ctx1->p;
    }
    if (neg) r = r.invert_unit();
    return r - TruncSeries::one(ctx1, M);
}

inline LaurentModP gamma_modp(const LaurentModP& x, const TruncSeries& gpi1) {
    const auto& ctx1 = x.ser.ctx;
    // substitute into the non-negative part; handle offset via (gamma pi)^{off}
    LaurentModP core(0, x.ser.substituted(gpi1, 0), x.len);
    LaurentModP gp = LaurentModP::from_poly(gpi1);
    gp.len = x.ser.M;
    if (x.off >= 0) {
        LaurentModP r = core;
        for (int i = 0; i < x.off; ++i) r = r * gp;
        return r;
    }
    LaurentModP gpinv = gp.inverted();
    LaurentModP r = core;
    for (int i = 0; i < -x.off; ++i) r = r * gpinv;
    return r;
}

// --------------------------------------------------------------------------

struct ModPModule {
    FieldCtxPtr ctx1;  // N = 1 context (residue field)
    int d = 0;
    int Mbar = 0;
    EmbeddedHodge k;
    std::vector<Mat<LaurentModP>> Mphi;    // per-embedding phi-matrices
    std::vector<Mat<LaurentModP>> Mgamma;  // stored generator's matrices
    GammaChar gamma;
    TruncSeries gpi1;  // gamma(pi) mod p
};

inline ModPModule reduce(const WachModule& W) {
    ModPModule out;
    out.ctx1 = W.ctx->with_precision(1);
    out.d = W.d;
    out.Mbar = W.M;
    out.k = W.k;
    out.gamma = W.gamma;
    out.gpi1 = gamma_pi_modp(out.ctx1, W.M, W.gamma);
    auto red = [&](const SeriesMat& m) {
        return m.map([&](const TruncSeries& s) {
            LaurentModP l(0, s.reduced_to(out.ctx1), W.M);
            return l;
        });
    };
    for (const auto& P : W.Phat) out.Mphi.push_back(red(P));
    for (const auto& G : W.Ghat) out.Mgamma.push_back(red(G));
    return out;
}

struct DetCharacter {
    long long h = 0;                   // sum k_j p^j (from the det pi-valuations)
    std::vector<long long> kvals;      // per-embedding (p-1)-divided valuations
    std::vector<UnramElem> unit_parts; // leading units of the determinants
};

// det(Mat(phi|_j)) = u_j pi^{(p-1) k_j}: read the valuations and units.
inline DetCharacter det_character(const ModPModule& N) {
    DetCharacter out;
    long long pj = 1;
    for (int j = 0; j < (int)N.Mphi.size(); ++j) {
        LaurentModP dj = det(N.Mphi[j]).normalized();
        auto o = dj.order();
        if (!o) throw math_error("det_character: determinant vanishes at precision");
        long long p1 = N.ctx1->p - 1;
        if (*o % p1 != 0) throw math_error("det_character: determinant valuation not divisible by p-1");
        out.kvals.push_back(*o / p1);
        out.unit_parts.push_back(dj.ser.a[0]);
        out.h += (*o / p1) * pj;
        pj *= N.ctx1->p;
    }
    return out;
}

// --------------------------------------------------------------------------
// Reduction labels.

struct ReductionLabel {
    enum class Kind { Reducible, Irreducible, Unknown } kind = Kind::Unknown;
    long long h = 0;              // exponent of omega_a (or omega_{2a})
    long long sub1 = 0, sub2 = 0; // Reducible: the two sub-character exponents
    std::string certificate;      // how the answer was established
    std::string omega;            // display label
};

namespace rdetail {

inline std::string omega_string(int a, long long h, bool irreducible) {
    if (irreducible) return "ind(w_" + std::to_string(2 * a) + "^" + std::to_string(h) + ")";
    return "w_" + std::to_string(a) + "^" + std::to_string(h);
}

// proportionality of 2-vectors over F((pi)) within the valid windows
inline bool proportional(const std::pair<LaurentModP, LaurentModP>& v, const std::pair<LaurentModP, LaurentModP>& w) {
    LaurentModP cross = v.first * w.second - v.second * w.first;
    return cross.is_zero();
}

struct LineCert {
    std::vector<std::pair<LaurentModP, LaurentModP>> gens;  // one generator per embedding
    std::vector<long long> evals;                           // per-embedding exponent e_j in {0, k_j}
};

// Verify that the line spanned by gen0 in N_0 propagates to a phi- and
// Gamma-stable chain of lines; returns the per-embedding exponents on
// success.
inline std::optional<LineCert> verify_line(const ModPModule& N, std::pair<LaurentModP, LaurentModP> gen0) {
    const int a = (int)N.Mphi.size();
    LineCert cert;
    cert.gens.assign(a, {gen0.first, gen0.second});
    // normalize content order to 0
    auto normalize = [&](std::pair<LaurentModP, LaurentModP> v) -> std::optional<std::pair<LaurentModP, LaurentModP>> {
        auto o1 = v.first.order(), o2 = v.second.order();
        if (!o1 && !o2) return std::nullopt;
        int o = o1 && o2 ? std::min(*o1, *o2) : (o1 ? *o1 : *o2);
        v.first.off -= o;
        v.second.off -= o;
        return v;
    };
    auto g0 = normalize(gen0);
    if (!g0) return std::nullopt;
    cert.gens[0] = *g0;
    cert.evals.assign(a, 0);
    // propagate: image of gen_j under phi lands in l_{j-1}
    std::vector<std::pair<LaurentModP, LaurentModP>> image(a, *g0);
    for (int step = 0; step < a; ++step) {
        int j = (a - step) % a;  // j = 0, a-1, ..., 1
        int jm1 = (j + a - 1) % a;
        const auto& gj = cert.gens[j];
        std::pair<LaurentModP, LaurentModP> im{
            N.Mphi[j].at(0, 0) * phi_modp(gj.first) + N.Mphi[j].at(0, 1) * phi_modp(gj.second),
            N.Mphi[j].at(1, 0) * phi_modp(gj.first) + N.Mphi[j].at(1, 1) * phi_modp(gj.second)};
        auto o1 = im.first.order(), o2 = im.second.order();
        if (!o1 && !o2) return std::nullopt;
        int c = o1 && o2 ? std::min(*o1, *o2) : (o1 ? *o1 : *o2);
        long long p1 = N.ctx1->p - 1;
        if (c % p1 != 0) return std::nullopt;
        long long e = c / p1;
        if (e != 0 && e != N.k.k[j][0]) return std::nullopt;
        cert.evals[j] = e;
        auto imn = normalize(im);
        if (!imn) return std::nullopt;
        if (step == a - 1) {
            // closure: image must span the same line as gen_0... (the chain
            // ends back at embedding (j-1) = the start)
            if (!proportional(*imn, cert.gens[jm1])) return std::nullopt;
        } else {
            cert.gens[jm1] = *imn;
        }
    }
    // Gamma-stability of every line for the stored generator
    for (int j = 0; j < a; ++j) {
        const auto& gj = cert.gens[j];
        std::pair<LaurentModP, LaurentModP> im{
            N.Mgamma[j].at(0, 0) * gamma_modp(gj.first, N.gpi1) + N.Mgamma[j].at(0, 1) * gamma_modp(gj.second, N.gpi1),
            N.Mgamma[j].at(1, 0) * gamma_modp(gj.first, N.gpi1) + N.Mgamma[j].at(1, 1) * gamma_modp(gj.second, N.gpi1)};
        if (!proportional(im, gj)) return std::nullopt;
    }
    return cert;
}

}  // namespace rdetail

// Decision procedure for 2-dimensional reductions; `origin` enables the
// theorem-backed family branches.
inline ReductionLabel classify_dim2(const ModPModule& N, const std::optional<FamilySpec>& origin = std::nullopt) {
    if (N.d != 2) throw input_error("classify_dim2: d = 2 only");
    const int a = (int)N.Mphi.size();
    const long long p = N.ctx1->p;
    for (int j = 0; j < a; ++j) {
        long long kj = N.k.k[j][0];
        bool boundary = true;
        for (int jj = 0; jj < a; ++jj)
            if (N.k.k[jj][0] != p) boundary = false;
        if (!boundary && (kj < 0 || kj > p - 1))
            throw input_error("classify_dim2: need 0 <= k_j <= p-1 (or the (p,...,p) boundary)");
    }
    long long h = 0, pj = 1;
    for (int j = 0; j < a; ++j) {
        h += N.k.k[j][0] * pj;
        pj *= p;
    }

    // (a) all-B family with ord v > 0: split by Prop-5.14-type descent
    if (origin) {
        bool allB = true;
        for (auto t : origin->partition)
            if (t != Part::B) allB = false;
        bool vpos = true;
        for (const auto& vj : origin->v)
            if (vj.valuation() < 1) vpos = false;
        if (allB && vpos) {
            ReductionLabel L;
            L.kind = ReductionLabel::Kind::Reducible;
            L.h = h;
            L.sub1 = h;
            L.sub2 = 0;
            L.certificate = "family-split";
            L.omega = rdetail::omega_string(a, h, false) + " (+) 1";
            return L;
        }
        bool shape515 = origin->partition[a - 1] == Part::A;
        for (int j = 0; j + 1 < a; ++j)
            if (origin->partition[j] != Part::B) shape515 = false;
        if (shape515 && vpos) {
            ReductionLabel L;
            L.kind = ReductionLabel::Kind::Irreducible;
            L.h = h;
            L.certificate = "family-irreducible";
            L.omega = rdetail::omega_string(a, h, true);
            return L;
        }
    }

    // (c) phi-stable line search.  Coordinate lines first, then the
    // valuation-balanced Newton scan of the composed projective equation.
    auto try_line = [&](std::pair<LaurentModP, LaurentModP> gen) -> std::optional<ReductionLabel> {
        auto cert = rdetail::verify_line(N, gen);
        if (!cert) return std::nullopt;
        ReductionLabel L;
        L.kind = ReductionLabel::Kind::Reducible;
        L.h = h;
        long long s1 = 0, pw = 1;
        for (int j = 0; j < a; ++j) {
            s1 += cert->evals[j] * pw;
            pw *= p;
        }
        L.sub1 = s1;
        L.sub2 = h - s1;
        L.certificate = "verified-line";
        L.omega = rdetail::omega_string(a, L.sub1, false) + " (+) " + rdetail::omega_string(a, L.sub2, false);
        return L;
    };

    auto one = LaurentModP(0, TruncSeries::one(N.ctx1, N.Mbar), N.Mbar);
    auto zero = LaurentModP::zero(N.ctx1, N.Mbar);
    if (auto L = try_line({one, zero})) return *L;
    if (auto L = try_line({zero, one})) return *L;

    // composed matrix Pbar_{(0)} = M_1 phi(M_2) ... phi^{a-1}(M_0)
    Mat<LaurentModP> Pc = N.Mphi[1 % a];
    for (int l = 1; l < a; ++l) Pc = Pc * N.Mphi[(1 + l) % a].map([&](const LaurentModP& x) { return phi_modp(x, l); });
    const LaurentModP &A = Pc.at(0, 0), &B = Pc.at(0, 1), &C = Pc.at(1, 0), &D = Pc.at(1, 1);
    auto oA = A.order(), oB = B.order(), oC = C.order(), oD = D.order();
    long long pa = 1;
    for (int i = 0; i < a; ++i) pa *= p;

    // term (valuation, slope) pairs present in C z phibar(z) + D z - A phibar(z) - B = 0
    struct Term {
        long long v;
        long long slope;
        int id;  // 0=C,1=D,2=A,3=B
    };
    std::vector<Term> terms;
    if (oC) terms.push_back({*oC, pa + 1, 0});
    if (oD) terms.push_back({*oD, 1, 1});
    if (oA) terms.push_back({*oA, pa, 2});
    if (oB) terms.push_back({*oB, 0, 3});
    if (terms.size() < 2) {
        ReductionLabel L;
        L.kind = ReductionLabel::Kind::Unknown;
        L.h = h;
        L.certificate = "degenerate composed equation at precision";
        return L;
    }
    // candidate valuations: exact pairwise balances; complete because the
    // slopes are pairwise distinct, so beyond the largest balance point one
    // term strictly dominates
    std::vector<long long> candidates;
    for (size_t i = 0; i < terms.size(); ++i)
        for (size_t j = i + 1; j < terms.size(); ++j) {
            long long dv = terms[i].v - terms[j].v, ds = terms[j].slope - terms[i].slope;
            if (dv % ds == 0) {
                long long nu = dv / ds;
                // balance must be the global minimum among all terms
                long long mv = terms[i].v + terms[i].slope * nu;
                bool minimal = true;
                for (const auto& t : terms)
                    if (t.v + t.slope * nu < mv) minimal = false;
                if (minimal) candidates.push_back(nu);
            }
        }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    bool found_candidate_roots = false;
    for (long long nu : candidates) {
        // leading-coefficient equation over the residue field from the
        // minimal terms
        long long mv = terms[0].v + terms[0].slope * nu;
        for (const auto& t : terms) mv = std::min(mv, t.v + t.slope * nu);
        UnramElem cC = N.ctx1->zero(), cD = N.ctx1->zero(), cA = N.ctx1->zero(), cB = N.ctx1->zero();
        if (oC && *oC + (pa + 1) * nu == mv) cC = C.normalized().ser.a[0];
        if (oD && *oD + nu == mv) cD = D.normalized().ser.a[0];
        if (oA && *oA + pa * nu == mv) cA = A.normalized().ser.a[0];
        if (oB && *oB == mv) cB = B.normalized().ser.a[0];
        // brute force z0 in F_{p^f}^*
        BigInt q = 1;
        for (int i = 0; i < N.ctx1->f; ++i) q *= p;
        for (BigInt w = 1; w < q; ++w) {
            BigInt t = w;
            std::vector<BigInt> cf(N.ctx1->f);
            for (int i = 0; i < N.ctx1->f; ++i) {
                cf[i] = t % p;
                t /= p;
            }
            UnramElem z0 = N.ctx1->from_coeffs(cf);
            UnramElem val = cC * z0 * z0.frobenius(a) + cD * z0 - cA * z0.frobenius(a) - cB;
            if (!val.is_zero()) continue;
            found_candidate_roots = true;
            // digit continuation of z = pi^nu (z0 + ...) against the full equation
            int budget = std::max(4, N.Mbar / 2);
            LaurentModP z(static_cast<int>(nu), TruncSeries::constant(z0, N.Mbar), budget);
            bool ok = true;
            for (int it = 0; it < 2 * budget && ok; ++it) {
                LaurentModP fz = phi_modp(z, a);
                LaurentModP res = C * z * fz + D * z - A * fz - B;
                auto ro = res.order();
                if (!ro) break;  // vanished to available precision
                // solve for the next digit: linear slot (C fz + D) or
                // Frobenius slot (C z - A)
                LaurentModP lin = C * fz + D;
                LaurentModP fro = C * z - A;
                auto lo = lin.order(), fo = fro.order();
                long long di_lin = lo ? *ro - *lo - nu : -1;
                long long di_fro = (fo && (*ro - *fo) % pa == 0) ? (*ro - *fo) / pa - nu : -1;
                UnramElem rc = res.normalized().ser.a[0];
                if (di_lin >= 0 && (di_fro < 0 || di_lin <= di_fro)) {
                    if (di_lin >= budget) break;
                    UnramElem lc = lin.normalized().ser.a[0];
                    if (di_fro == di_lin) {
                        // sigma-linear digit equation: lc x + fc sigma^a(x) = -rc; brute force
                        UnramElem fc = fro.normalized().ser.a[0];
                        bool solved = false;
                        for (BigInt ww = 0; ww < q; ++ww) {
                            BigInt tt = ww;
                            std::vector<BigInt> cg(N.ctx1->f);
                            for (int i = 0; i < N.ctx1->f; ++i) {
                                cg[i] = tt % p;
                                tt /= p;
                            }
                            UnramElem x = N.ctx1->from_coeffs(cg);
                            if ((lc * x + fc * x.frobenius(a) + rc).is_zero()) {
                                if (!x.is_zero()) {
                                    LaurentModP add((int)(nu + di_lin), TruncSeries::constant(x, N.Mbar), budget);
                                    z += add;
                                }
                                solved = true;
                                break;
                            }
                        }
                        if (!solved) ok = false;
                    } else {
                        UnramElem x = -(rc * lc.invert());
                        LaurentModP add((int)(nu + di_lin), TruncSeries::constant(x, N.Mbar), budget);
                        z += add;
                    }
                } else if (di_fro >= 0) {
                    if (di_fro >= budget) break;
                    UnramElem fc = fro.normalized().ser.a[0];
                    UnramElem x = -(rc * fc.invert());
                    x = x.frobenius(-a);  // undo sigma^a
                    LaurentModP add((int)(nu + di_fro), TruncSeries::constant(x, N.Mbar), budget);
                    z += add;
                } else {
                    ok = false;
                }
            }
            if (!ok) continue;
            // candidate line (z, 1) in N_0
            LaurentModP one2(0, TruncSeries::one(N.ctx1, N.Mbar), budget);
            if (auto L = try_line({z, one2})) return *L;
        }
    }

    // monomial two-term case: certified irreducible when no integer
    // valuation balances the equation
    bool monomial = !oA.has_value() && !oD.has_value() && oB.has_value() && oC.has_value();
    if (monomial && candidates.empty()) {
        ReductionLabel L;
        L.kind = ReductionLabel::Kind::Irreducible;
        L.h = h;
        L.certificate = "valuation-obstruction";
        L.omega = rdetail::omega_string(a, h, true);
        return L;
    }
    if (monomial && !found_candidate_roots && !candidates.empty()) {
        // integer valuation exists but the leading equation has no root over
        // the residue field: still certified (any solution would reduce to one)
        ReductionLabel L;
        L.kind = ReductionLabel::Kind::Irreducible;
        L.h = h;
        L.certificate = "leading-coefficient-obstruction";
        L.omega = rdetail::omega_string(a, h, true);
        return L;
    }

    ReductionLabel L;
    L.kind = ReductionLabel::Kind::Unknown;
    L.h = h;
    L.certificate = "line search exhausted (bounded, sound)";
    return L;
}

// For anti-diagonal composed matrices: does the leading equation
// z * phibar^a(z) = c pi^s admit a solution with z over the PRIME field
// F_p((pi))?  Returns nullopt when the composed matrix is not of the
// two-term monomial shape.  (Over the prime field phibar^a is literally the
// p^a-power map, so the equation reads z^{p^a+1} = c pi^s.)
inline std::optional<bool> prime_leading_solvable(const ModPModule& N) {
    if (N.d != 2) throw input_error("prime_leading_solvable: d = 2 only");
    const int a = (int)N.Mphi.size();
    const long long p = N.ctx1->p;
    Mat<LaurentModP> Pc = N.Mphi[1 % a];
    for (int l = 1; l < a; ++l) Pc = Pc * N.Mphi[(1 + l) % a].map([&](const LaurentModP& x) { return phi_modp(x, l); });
    auto oA = Pc.at(0, 0).order(), oB = Pc.at(0, 1).order(), oC = Pc.at(1, 0).order(), oD = Pc.at(1, 1).order();
    if (oA || oD || !oB || !oC) return std::nullopt;
    long long pa = 1;
    for (int i = 0; i < a; ++i) pa *= p;
    // C z z^{p^a} = B => valuation (p^a+1) nu = oB - oC
    long long s = *oB - *oC;
    if (s % (pa + 1) != 0) return false;
    // leading: z0^{p^a+1} = cB / cC in F_p (prime-field scalars only)
    UnramElem cB = Pc.at(0, 1).normalized().ser.a[0];
    UnramElem cC = Pc.at(1, 0).normalized().ser.a[0];
    UnramElem target = cB * cC.invert();
    for (long long z0 = 1; z0 < p; ++z0) {
        UnramElem z = N.ctx1->from_scalar(z0);
        if (z.pow(pa + 1) == target) return true;
    }
    return false;
}

// Full pipeline: fl_lift -> reduce -> classify, with the determinant
// character consistency assertion.
inline ReductionLabel theoremE_label(const RepSpec& spec, int M,
                                     const std::optional<FamilySpec>& origin = std::nullopt) {
    long long kmax = 0;
    for (const auto& row : spec.k.k) kmax = std::max(kmax, row[0]);
    if ((spec.ctx->p - 1) * kmax >= M)
        throw input_error("theoremE_label: pi-precision M must exceed (p-1) max k_j for the reduction");
    WachModule W = fl_lift(spec, M);
    ModPModule N = reduce(W);
    DetCharacter dc = det_character(N);
    long long pa1 = 1;
    for (int i = 0; i < spec.a(); ++i) pa1 *= spec.ctx->p;
    pa1 -= 1;
    long long expect = 0, pj = 1;
    for (int j = 0; j < spec.a(); ++j) {
        expect += spec.k.k[j][0] * pj;
        pj *= spec.ctx->p;
    }
    if (mod_reduce(BigInt(dc.h - expect), pa1) != 0)
        throw math_error("theoremE_label: det character exponent mismatch");
    ReductionLabel L = classify_dim2(N, origin);
    // the k = 0 irreducible boundary is labeled ind(w_{2a}^{p^a - 1})
    if (L.kind == ReductionLabel::Kind::Irreducible && L.h == 0) {
        L.h = pa1;
        L.omega = rdetail::omega_string(spec.a(), L.h, true);
    }
    return L;
}

}  // namespace wachlab
