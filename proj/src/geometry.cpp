#include "msk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "msk/symcalc.hpp"

namespace msk::geometry {

using functionals::ConvexPotential;

Vec FramePoint::frame_vector(int a) const {
    Vec e(n + 1, 0.0);
    for (int c = 0; c <= n; ++c)
        for (int i = 0; i < n; ++i) e[c] += d1(c, i) * push(i, a);
    return e;
}

namespace {

// Unit normal from the cofactor (generalized cross product) of d1, oriented by
// the chart's rule.
Vec oriented_normal(const Chart& chart, const Vec& x, const Matrix& d1) {
    const int n = chart.n;
    Vec nrm(n + 1, 0.0);
    for (int c = 0; c <= n; ++c) {
        Matrix minor(n, n);
        int rr = 0;
        for (int r = 0; r <= n; ++r) {
            if (r == c) continue;
            for (int j = 0; j < n; ++j) minor(rr, j) = d1(r, j);
            ++rr;
        }
        nrm[c] = ((c % 2) == 0 ? 1.0 : -1.0) * determinant(minor);
    }
    const double len = norm2(nrm);
    if (!(len > 1e-14)) throw immersion_error("chart '" + chart.id + "': degenerate normal");
    for (double& v : nrm) v /= len;

    bool flip = false;
    if (chart.orient == Orientation::toward_reference) {
        double s = 0.0;
        for (int c = 0; c <= n; ++c) s += nrm[c] * (chart.reference_point[c] - x[c]);
        flip = s < 0.0;
    } else {
        flip = nrm[n] < 0.0;
    }
    if (flip)
        for (double& v : nrm) v = -v;
    return nrm;
}

SymMatrix push_two_form(const SymMatrix& w, const SymMatrix& p) {
    return SymMatrix::symmetrize(p.mat() * w.mat() * p.mat());
}

std::string node_string(const Vec& u) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
    os << ")";
    return os.str();
}

}  // namespace

FramePoint frame_from_jets(const Chart& chart, const Vec& u, const ChartJets& j) {
    const int n = chart.n;
    FramePoint fp;
    fp.n = n;
    fp.u = u;
    fp.x = j.x;
    fp.d1 = j.d1;

    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int c = 0; c <= n; ++c) s += j.d1(c, i) * j.d1(c, k);
            g(i, k) = s;
        }
    fp.g = SymMatrix::symmetrize(g);

    // One eigensolve of g supplies the immersion test (relative, so nodes close
    // to a sphere pole with tiny but honest metric stay valid), the area factor,
    // g^{-1} and the frame push g^{-1/2}.
    const EigenSym eg = eigen_sym(fp.g);
    if (!(eg.values.front() > 1e-14 * eg.values.back()))
        throw immersion_error("chart '" + chart.id + "': rank-deficient d1 at " +
                              node_string(u));
    double detg = 1.0;
    for (double w : eg.values) detg *= w;
    fp.area = std::sqrt(detg);
    Matrix ginv(n, n), push(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double si = 0.0, sp = 0.0;
            for (int m = 0; m < n; ++m) {
                const double q = eg.vectors(i, m) * eg.vectors(k, m);
                si += q / eg.values[m];
                sp += q / std::sqrt(eg.values[m]);
            }
            ginv(i, k) = si;
            push(i, k) = sp;
        }
    fp.ginv = SymMatrix::symmetrize(ginv);
    fp.push = SymMatrix::symmetrize(push);
    fp.normal = oriented_normal(chart, fp.x, fp.d1);

    SymMatrix ii(n);
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
            double s = 0.0;
            for (int c = 0; c <= n; ++c) s += j.d2(c, i, k) * fp.normal[c];
            ii.set(i, k, s);
        }
    fp.second_form = ii;
    fp.shape_frame = push_two_form(ii, fp.push);

    // Gamma^m_{ij} = g^{mp} <X_ij, X_p>
    fp.christoffel = Tensor3(n, n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            for (int m = 0; m < n; ++m) {
                double s = 0.0;
                for (int p = 0; p < n; ++p) {
                    double first = 0.0;
                    for (int c = 0; c <= n; ++c) first += j.d2(c, i, k) * j.d1(c, p);
                    s += fp.ginv(m, p) * first;
                }
                fp.christoffel(m, i, k) = s;
            }
        }
    return fp;
}

FramePoint frame_at(const Chart& chart, const Vec& u) {
    return frame_from_jets(chart, u, chart_jets(chart, u, 2));
}

SymMatrix second_form_gram_schmidt(const Chart& chart, const Vec& u,
                                   const std::vector<int>& order) {
    const ChartJets j = chart_jets(chart, u, 2);
    const int n = chart.n;
    if (static_cast<int>(order.size()) != n)
        throw validation_error("second_form_gram_schmidt: order must be a permutation of 0..n-1");

    // Modified Gram-Schmidt over permuted coordinate tangents; rows of coef
    // express the frame vectors in the (permuted) tangent basis.
    Matrix tangents(n + 1, n);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c <= n; ++c) tangents(c, a) = j.d1(c, order[a]);
    Matrix frame = tangents;
    Matrix coef = Matrix::identity(n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < a; ++b) {
            double proj = 0.0;
            for (int c = 0; c <= n; ++c) proj += frame(c, a) * frame(c, b);
            for (int c = 0; c <= n; ++c) frame(c, a) -= proj * frame(c, b);
            for (int i = 0; i < n; ++i) coef(i, a) -= proj * coef(i, b);
        }
        double len = 0.0;
        for (int c = 0; c <= n; ++c) len += frame(c, a) * frame(c, a);
        len = std::sqrt(len);
        if (!(len > 1e-14)) throw immersion_error("gram-schmidt: dependent tangents");
        for (int c = 0; c <= n; ++c) frame(c, a) /= len;
        for (int i = 0; i < n; ++i) coef(i, a) /= len;
    }

    const Vec nrm = oriented_normal(chart, j.x, j.d1);
    SymMatrix ii_perm(n);
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
            double s = 0.0;
            for (int c = 0; c <= n; ++c) s += j.d2(c, order[i], order[k]) * nrm[c];
            ii_perm.set(i, k, s);
        }
    Matrix l = coef.transposed() * ii_perm.mat() * coef;
    return SymMatrix::symmetrize(l);
}

ScalarField constant_field(double c) {
    ScalarField f;
    f.max_order = 4;
    f.is_zero = c == 0.0;
    f.jet = [c](const Vec& u, int order) {
        return Jet::constant(static_cast<int>(u.size()), order, c);
    };
    return f;
}

ScalarField restrict_potential(const Chart& chart, const ConvexPotential& pot) {
    if (pot.ambient_dim != chart.n + 1)
        throw validation_error("restrict_potential: ambient dimension mismatch");
    ScalarField f;
    f.max_order = 3;
    f.is_zero = pot.is_zero;
    const auto embed = chart.embed;
    const auto formula = pot.formula;
    const int n = chart.n;
    f.jet = [embed, formula, n](const Vec& u, int order) {
        std::vector<Jet> vars;
        vars.reserve(n);
        for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(n, order, i, u[i]));
        return formula(embed(vars));
    };
    return f;
}

SymMatrix covariant_hessian(const Chart& chart, const ScalarField& f, const Vec& u) {
    if (f.max_order < 2)
        throw validation_error("covariant_hessian: field does not supply a Hessian");
    const FramePoint fp = frame_at(chart, u);
    const Jet fj = f.jet(u, 2);
    const int n = chart.n;
    SymMatrix w(n);
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
            double s = 0.5 * (fj.d2(i, k) + fj.d2(k, i));
            for (int m = 0; m < n; ++m) s -= fp.christoffel(m, i, k) * fj.d1(m);
            w.set(i, k, s);
        }
    return push_two_form(w, fp.push);
}

// ---- curvature jets (second-order geometry data) ---------------------------

namespace {

struct CurvatureJet {
    FramePoint fp;
    std::vector<Matrix> dg;     // dg[c](i,j) = d_c g_ij
    std::vector<Matrix> dginv;  // d_c g^{-1}
    Tensor3 dii;                // (c, i, j) = d_c II_ij
    Tensor4 dgamma;             // (c, m, i, j) = d_c Gamma^m_{ij}
};

CurvatureJet curvature_jet(const Chart& chart, const Vec& u) {
    const ChartJets j = chart_jets(chart, u, 3);
    CurvatureJet cj;
    cj.fp = frame_from_jets(chart, u, j);
    const int n = chart.n;
    const FramePoint& fp = cj.fp;

    cj.dg.assign(n, Matrix(n, n));
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int a = 0; a <= n; ++a)
                    s += j.d2(a, i, c) * j.d1(a, k) + j.d1(a, i) * j.d2(a, k, c);
                cj.dg[c](i, k) = s;
            }

    cj.dginv.assign(n, Matrix(n, n));
    const Matrix ginv = fp.ginv.mat();
    for (int c = 0; c < n; ++c) cj.dginv[c] = (ginv * cj.dg[c] * ginv).scaled(-1.0);

    // d_c n = -sum_p (g^{-1} II)_{pc} X_p
    const Matrix shape_coef = ginv * fp.second_form.mat();
    Matrix dnormal(n + 1, n);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a <= n; ++a) {
            double s = 0.0;
            for (int p = 0; p < n; ++p) s -= shape_coef(p, c) * j.d1(a, p);
            dnormal(a, c) = s;
        }

    cj.dii = Tensor3(n, n, n);
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int a = 0; a <= n; ++a)
                    s += j.d3(a, i, k, c) * fp.normal[a] + j.d2(a, i, k) * dnormal(a, c);
                cj.dii(c, i, k) = s;
            }

    // d_d Gamma^m_{ij} = d_d(g^{mp}) <X_ij, X_p> + g^{mp} (<X_ijd, X_p> + <X_ij, X_pd>)
    cj.dgamma = Tensor4(n, n, n, n);
    for (int d = 0; d < n; ++d)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int m = 0; m < n; ++m) {
                    double s = 0.0;
                    for (int p = 0; p < n; ++p) {
                        double first = 0.0, dfirst = 0.0;
                        for (int a = 0; a <= n; ++a) {
                            first += j.d2(a, i, k) * j.d1(a, p);
                            dfirst += j.d3(a, i, k, d) * j.d1(a, p) +
                                      j.d2(a, i, k) * j.d2(a, p, d);
                        }
                        s += cj.dginv[d](m, p) * first + ginv(m, p) * dfirst;
                    }
                    cj.dgamma(d, m, i, k) = s;
                }
    return cj;
}

// nabla_c II_ij = d_c II_ij - Gamma^m_{ci} II_mj - Gamma^m_{cj} II_im
Tensor3 covariant_second_form_derivative(const CurvatureJet& cj) {
    const int n = cj.fp.n;
    Tensor3 nab(n, n, n);
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double s = cj.dii(c, i, k);
                for (int m = 0; m < n; ++m)
                    s -= cj.fp.christoffel(m, c, i) * cj.fp.second_form(m, k) +
                         cj.fp.christoffel(m, c, k) * cj.fp.second_form(i, m);
                nab(c, i, k) = s;
            }
    return nab;
}

}  // namespace

double codazzi_residual(const Chart& chart, const Vec& u) {
    const CurvatureJet cj = curvature_jet(chart, u);
    const Tensor3 nab = covariant_second_form_derivative(cj);
    const int n = cj.fp.n;
    double worst = 0.0;
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                worst = std::max(worst, std::abs(nab(c, i, k) - nab(k, i, c)));
    return worst / (1.0 + nab.max_abs());
}

double gauss_residual(const Chart& chart, const Vec& u) {
    const CurvatureJet cj = curvature_jet(chart, u);
    const int n = cj.fp.n;
    const FramePoint& fp = cj.fp;

    // R^m_{i cd} = d_c Gamma^m_{di} - d_d Gamma^m_{ci}
    //            + Gamma^m_{ca} Gamma^a_{di} - Gamma^m_{da} Gamma^a_{ci}
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < n; ++p)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double rm = 0.0;
                    for (int m = 0; m < n; ++m) {
                        double r = cj.dgamma(c, m, d, i) - cj.dgamma(d, m, c, i);
                        for (int a = 0; a < n; ++a)
                            r += fp.christoffel(m, c, a) * fp.christoffel(a, d, i) -
                                 fp.christoffel(m, d, a) * fp.christoffel(a, c, i);
                        rm += fp.g(p, m) * r;
                    }
                    const double gauss = fp.second_form(p, c) * fp.second_form(i, d) -
                                         fp.second_form(p, d) * fp.second_form(i, c);
                    worst = std::max(worst, std::abs(rm - gauss));
                    scale = std::max({scale, std::abs(rm), std::abs(gauss)});
                }
    return worst / (1.0 + scale);
}

namespace {

// Equal-argument Newton chain with directional derivatives:
// T_j = sigma_j I - T_{j-1} M, sigma_j = Tr(T_{j-1} M)/j.
void newton_chain_derivative(const Matrix& m, const std::vector<Matrix>& dm, int k, Matrix& t,
                             std::vector<Matrix>& dt) {
    const int n = m.rows();
    const int dirs = static_cast<int>(dm.size());
    t = Matrix::identity(n);
    dt.assign(dirs, Matrix(n, n));
    for (int j = 1; j <= k; ++j) {
        const Matrix tm = t * m;
        std::vector<Matrix> dtm(dirs);
        for (int c = 0; c < dirs; ++c) dtm[c] = dt[c] * m + t * dm[c];
        const double sigma_j = tm.trace() / j;
        Matrix tj = Matrix::identity(n).scaled(sigma_j) - tm;
        for (int c = 0; c < dirs; ++c)
            dt[c] = Matrix::identity(n).scaled(dtm[c].trace() / j) - dtm[c];
        t = std::move(tj);
    }
}

// Mixed Newton tensor field T_k(H x m, S x (k-m)) with coordinate derivatives,
// polarized over argument-count subsets of the two distinct slots.
void mixed_newton_derivative(const Matrix& h, const std::vector<Matrix>& dh, const Matrix& s,
                             const std::vector<Matrix>& ds, int k, int m, Matrix& t,
                             std::vector<Matrix>& dt) {
    const int n = s.rows();
    const int dirs = static_cast<int>(ds.size());
    t = Matrix(n, n);
    dt.assign(dirs, Matrix(n, n));
    double kfact = 1.0;
    for (int j = 2; j <= k; ++j) kfact *= j;
    for (int a = 0; a <= m; ++a)
        for (int b = 0; b <= k - m; ++b) {
            if (a + b == 0) continue;
            const double coef = ((k - a - b) % 2 == 0 ? 1.0 : -1.0) *
                                binomial(m, a) * binomial(k - m, b) / kfact;
            Matrix arg(n, n);
            std::vector<Matrix> darg(dirs, Matrix(n, n));
            for (int i = 0; i < n; ++i)
                for (int j2 = 0; j2 < n; ++j2) arg(i, j2) = a * h(i, j2) + b * s(i, j2);
            for (int c = 0; c < dirs; ++c)
                for (int i = 0; i < n; ++i)
                    for (int j2 = 0; j2 < n; ++j2)
                        darg[c](i, j2) = a * dh[c](i, j2) + b * ds[c](i, j2);
            Matrix tj;
            std::vector<Matrix> dtj;
            newton_chain_derivative(arg, darg, k, tj, dtj);
            t = t + tj.scaled(coef);
            for (int c = 0; c < dirs; ++c) dt[c] = dt[c] + dtj[c].scaled(coef);
        }
}

}  // namespace

DivergenceResidual div_newton_residual(const Chart& chart, const Vec& u, int k, int m,
                                       const ConvexPotential* pot) {
    const int n = chart.n;
    if (k < 1 || k > n - 1) throw domain_error("div_newton_residual: requires 1 <= k <= n-1");
    if (m < 0 || m > k - 1) throw domain_error("div_newton_residual: requires 0 <= m <= k-1");
    if (m >= 1 && (pot == nullptr))
        throw validation_error("div_newton_residual: m >= 1 needs a potential");

    const CurvatureJet cj = curvature_jet(chart, u);
    const FramePoint& fp = cj.fp;
    const Matrix ginv = fp.ginv.mat();
    const Matrix ii = fp.second_form.mat();

    // Shape operator field S = g^{-1} II and its coordinate derivatives.
    const Matrix s = ginv * ii;
    std::vector<Matrix> ds(n);
    for (int c = 0; c < n; ++c) {
        Matrix dii_c(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dii_c(i, j) = cj.dii(c, i, j);
        ds[c] = cj.dginv[c] * ii + ginv * dii_c;
    }

    Matrix h(n, n);
    std::vector<Matrix> dh(n, Matrix(n, n));
    Vec gradv(n, 0.0);
    if (m >= 1) {
        const ScalarField v = restrict_potential(chart, *pot);
        const Jet vj = v.jet(u, 3);
        for (int i = 0; i < n; ++i) gradv[i] = vj.d1(i);
        Matrix w(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double x = vj.d2(i, j);
                for (int a = 0; a < n; ++a) x -= fp.christoffel(a, i, j) * vj.d1(a);
                w(i, j) = x;
            }
        h = ginv * w;
        for (int c = 0; c < n; ++c) {
            Matrix dw(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double x = vj.d3(i, j, c);
                    for (int a = 0; a < n; ++a)
                        x -= cj.dgamma(c, a, i, j) * vj.d1(a) +
                             fp.christoffel(a, i, j) * vj.d2(a, c);
                    dw(i, j) = x;
                }
            dh[c] = cj.dginv[c] * w + ginv * dw;
        }
    }

    Matrix t;
    std::vector<Matrix> dt;
    mixed_newton_derivative(h, dh, s, ds, k, m, t, dt);

    // div_j = d_i T^i_j + Gamma^i_{ia} T^a_j - Gamma^a_{ij} T^i_a
    Vec div(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double x = 0.0;
        for (int i = 0; i < n; ++i) {
            x += dt[i](i, j);
            for (int a = 0; a < n; ++a)
                x += fp.christoffel(i, i, a) * t(a, j) - fp.christoffel(a, i, j) * t(i, a);
        }
        div[j] = x;
    }
    Vec div_frame(n, 0.0);
    for (int b = 0; b < n; ++b)
        for (int j = 0; j < n; ++j) div_frame[b] += div[j] * fp.push(j, b);

    DivergenceResidual out;
    out.residual_frame = div_frame;
    double scale = std::max(t.max_abs(), msk::max_abs(div_frame));

    if (m >= 1) {
        // rhs = -m T_k(H x (m-1), S x (k-m+1)) L grad v, assembled in the frame.
        const SymMatrix lhat = fp.shape_frame;
        SymMatrix hhat(n);
        {
            Matrix w = fp.g.mat() * h;  // back to the (0,2) Hessian
            hhat = push_two_form(SymMatrix::symmetrize(w), fp.push);
        }
        std::vector<SymMatrix> args;
        args.insert(args.end(), m - 1, hhat);
        args.insert(args.end(), k - m + 1, lhat);
        const SymMatrix that = symcalc::newton_tensor(symcalc::MatrixTuple(args));
        Vec gv_frame(n, 0.0);
        for (int b = 0; b < n; ++b)
            for (int j = 0; j < n; ++j) gv_frame[b] += gradv[j] * fp.push(j, b);
        const Vec lg = lhat.mat().apply(gv_frame);
        const Vec rhs = that.mat().apply(lg);
        for (int b = 0; b < n; ++b) out.residual_frame[b] += m * rhs[b];
        scale = std::max(scale, static_cast<double>(m) * msk::max_abs(rhs));
    }

    out.scale = scale;
    out.max_normalized = msk::max_abs(out.residual_frame) / (1.0 + scale);
    return out;
}

// ---- covariant derivatives of scalar fields --------------------------------

namespace {

struct CoordDerivs {  // coordinate-space covariant derivatives through order 3
    double value;
    Vec d1;
    SymMatrix d2c;  // covariant
    Tensor3 d3c;    // covariant
};

CoordDerivs coord_covariant(const CurvatureJet& cj, const ScalarField& f, const Vec& u,
                            int order) {
    const int n = cj.fp.n;
    const Jet fj = f.jet(u, std::min(order, 3));
    CoordDerivs cd;
    cd.value = fj.value();
    cd.d1.resize(n);
    for (int i = 0; i < n; ++i) cd.d1[i] = fj.d1(i);
    if (order >= 2) {
        cd.d2c = SymMatrix(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double s = 0.5 * (fj.d2(i, j) + fj.d2(j, i));
                for (int m = 0; m < n; ++m) s -= cj.fp.christoffel(m, i, j) * fj.d1(m);
                cd.d2c.set(i, j, s);
            }
    }
    if (order >= 3) {
        // nabla^3 f_ijk = d_k (nabla^2 f_ij) - Gamma^m_{ik} nabla^2 f_mj
        //                 - Gamma^m_{jk} nabla^2 f_im,
        // with d_k (nabla^2 f_ij) = d3 f - dGamma d1 f - Gamma d2 f.
        cd.d3c = Tensor3(n, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double s = fj.d3(i, j, k);
                    for (int m = 0; m < n; ++m)
                        s -= cj.dgamma(k, m, i, j) * fj.d1(m) +
                             cj.fp.christoffel(m, i, j) * fj.d2(m, k);
                    for (int m = 0; m < n; ++m)
                        s -= cj.fp.christoffel(m, i, k) * cd.d2c(m, j) +
                             cj.fp.christoffel(m, j, k) * cd.d2c(i, m);
                    cd.d3c(i, j, k) = s;
                }
    }
    return cd;
}

}  // namespace

double CovariantDerivs::norm(int m) const {
    switch (m) {
        case 0: return std::abs(value);
        case 1: return norm2(grad);
        case 2: return hess.frobenius();
        case 3: {
            double s = 0.0;
            const int n = third.dim(0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) s += third(i, j, k) * third(i, j, k);
            return std::sqrt(s);
        }
        case 4: {
            double s = 0.0;
            const int n = fourth.dim(0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) s += fourth(i, j, k, l) * fourth(i, j, k, l);
            return std::sqrt(s);
        }
        default: throw domain_error("CovariantDerivs::norm: order out of range");
    }
}

CovariantDerivs covariant_derivatives(const Chart& chart, const ScalarField& f, const Vec& u,
                                      int order) {
    if (order < 0 || order > 4) throw domain_error("covariant_derivatives: order out of [0,4]");
    if (order > f.max_order && !f.is_zero)
        throw validation_error("covariant_derivatives: field does not supply order " +
                               std::to_string(order));
    const int n = chart.n;
    CovariantDerivs out;
    out.order = order;

    if (f.is_zero) {
        out.value = 0.0;
        out.grad.assign(n, 0.0);
        out.hess = SymMatrix(n);
        out.third = Tensor3(n, n, n);
        out.fourth = Tensor4(n, n, n, n);
        return out;
    }

    const CurvatureJet cj = (order >= 3) ? curvature_jet(chart, u) : CurvatureJet{frame_at(chart, u), {}, {}, {}, {}};
    const CoordDerivs cd = coord_covariant(cj, f, u, std::min(order, 3));
    const SymMatrix& p = cj.fp.push;

    out.value = cd.value;
    if (order >= 1) {
        out.grad.assign(n, 0.0);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < n; ++i) out.grad[a] += cd.d1[i] * p(i, a);
    }
    if (order >= 2) out.hess = push_two_form(cd.d2c, p);
    if (order >= 3) {
        out.third = Tensor3(n, n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            for (int k = 0; k < n; ++k)
                                s += cd.d3c(i, j, k) * p(i, a) * p(j, b) * p(k, c);
                    out.third(a, b, c) = s;
                }
    }
    if (order >= 4) {
        // d_l of the exact third covariant derivative field by central
        // differences, then the Christoffel correction at u.
        const double h = chart.fd_step;
        Tensor4 nab4(n, n, n, n);
        std::vector<Tensor3> plus(n), minus(n);
        for (int l = 0; l < n; ++l) {
            Vec up = u, dn = u;
            up[l] += h;
            dn[l] -= h;
            const CurvatureJet cp = curvature_jet(chart, up);
            const CurvatureJet cm = curvature_jet(chart, dn);
            plus[l] = coord_covariant(cp, f, up, 3).d3c;
            minus[l] = coord_covariant(cm, f, dn, 3).d3c;
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double s = (plus[l](i, j, k) - minus[l](i, j, k)) / (2.0 * h);
                        for (int m = 0; m < n; ++m)
                            s -= cj.fp.christoffel(m, i, l) * cd.d3c(m, j, k) +
                                 cj.fp.christoffel(m, j, l) * cd.d3c(i, m, k) +
                                 cj.fp.christoffel(m, k, l) * cd.d3c(i, j, m);
                        nab4(i, j, k, l) = s;
                    }
        out.fourth = Tensor4(n, n, n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) {
                        double s = 0.0;
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                for (int k = 0; k < n; ++k)
                                    for (int l = 0; l < n; ++l)
                                        s += nab4(i, j, k, l) * p(i, a) * p(j, b) * p(k, c) *
                                             p(l, d);
                        out.fourth(a, b, c, d) = s;
                    }
    }
    return out;
}

RestrictionData restriction_data(const Chart& chart, const ConvexPotential& pot,
                                 const FramePoint& fp) {
    const int n = chart.n;
    RestrictionData rd;
    if (pot.is_zero) {
        rd.grad_frame.assign(n, 0.0);
        rd.hess_frame = SymMatrix(n);
        return rd;
    }
    const ScalarField v = restrict_potential(chart, pot);
    const Jet vj = v.jet(fp.u, 2);
    rd.v = vj.value();
    rd.grad_frame.assign(n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) rd.grad_frame[a] += vj.d1(i) * fp.push(i, a);
    rd.grad_norm = norm2(rd.grad_frame);
    SymMatrix w(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.5 * (vj.d2(i, j) + vj.d2(j, i));
            for (int m = 0; m < n; ++m) s -= fp.christoffel(m, i, j) * vj.d1(m);
            w.set(i, j, s);
        }
    rd.hess_frame = push_two_form(w, fp.push);
    rd.b = dot(pot.gradient(fp.x), fp.normal);
    return rd;
}

double restriction_hessian_residual(const Chart& chart, const ConvexPotential& pot,
                                    const Vec& u) {
    const FramePoint fp = frame_at(chart, u);
    const RestrictionData rd = restriction_data(chart, pot, fp);
    const int n = chart.n;

    const SymMatrix ambient = pot.hessian(fp.x);
    SymMatrix tangential(n);
    for (int a = 0; a < n; ++a) {
        const Vec ea = fp.frame_vector(a);
        for (int b = a; b < n; ++b) {
            const Vec eb = fp.frame_vector(b);
            double s = 0.0;
            for (int c = 0; c <= n; ++c)
                for (int d = 0; d <= n; ++d) s += ea[c] * ambient(c, d) * eb[d];
            tangential.set(a, b, s);
        }
    }
    const SymMatrix rhs = tangential + fp.shape_frame.scaled(rd.b);
    const SymMatrix diff = rd.hess_frame - rhs;
    const double scale = std::max(rd.hess_frame.max_abs(), rhs.max_abs());
    return diff.max_abs() / (1.0 + scale);
}

// ---- quadrature -------------------------------------------------------------

std::vector<double> integrate_many(
    const Chart& chart, const Grid& grid, int nfns,
    const std::function<void(std::size_t, const FramePoint&, std::vector<double>&)>& eval,
    int workers) {
    const std::size_t nn = grid.size();
    std::vector<double> buf(nn * nfns);

    auto run_block = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> vals(nfns);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const Vec u = grid.node(idx);
            const FramePoint fp = frame_at(chart, u);
            eval(idx, fp, vals);
            const double wa = grid.weight(idx) * fp.area;
            for (int f = 0; f < nfns; ++f) {
                const double v = vals[f] * wa;
                if (!std::isfinite(v))
                    throw integration_error("non-finite integrand at node " +
                                            std::to_string(idx) + " u=" + node_string(u));
                buf[idx * nfns + f] = v;
            }
        }
    };

    if (workers <= 1) {
        run_block(0, nn);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(workers);
        const std::size_t chunk = (nn + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w]() {
                try {
                    run_block(std::min(nn, w * chunk), std::min(nn, (w + 1) * chunk));
                } catch (...) {
                    errs[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    std::vector<double> out(nfns);
    for (int f = 0; f < nfns; ++f) {
        CompensatedSum cs;
        for (std::size_t idx = 0; idx < nn; ++idx) cs.add(buf[idx * nfns + f]);
        out[f] = cs.value();
    }
    return out;
}

double integrate(const Chart& chart, const Grid& grid,
                 const std::function<double(const FramePoint&)>& integrand) {
    return integrate_many(chart, grid, 1,
                          [&](std::size_t, const FramePoint& fp, std::vector<double>& out) {
                              out[0] = integrand(fp);
                          })[0];
}

KConvexity cone_scan(const Chart& chart, const Grid& grid, int cone_order) {
    if (cone_order < 1 || cone_order > chart.n)
        throw domain_error("cone_scan: cone order out of [1, n]");
    KConvexity out;
    out.cone_order = cone_order;
    out.pass = true;
    out.worst_margin = std::numeric_limits<double>::infinity();
    const std::size_t nn = grid.size();
    for (std::size_t idx = 0; idx < nn; ++idx) {
        const Vec u = grid.node(idx);
        const FramePoint fp = frame_at(chart, u);
        const symcalc::ConeQuery q = symcalc::cone_member(fp.shape_frame, cone_order);
        for (int j = 0; j < cone_order; ++j)
            if (q.margins[j] < out.worst_margin) {
                out.worst_margin = q.margins[j];
                out.worst_node = u;
                out.worst_sigma_order = j + 1;
            }
        if (!q.member) out.pass = false;
    }
    return out;
}

KConvexity kconvexity_scan(const Chart& chart, const Grid& grid, int k) {
    if (k < 1 || k > chart.n) throw domain_error("kconvexity_scan: k out of [1, n]");
    return cone_scan(chart, grid, std::min(k + 1, chart.n));
}

}  // namespace msk::geometry
