#include "baryopt/grassmann.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "baryopt/manifold.hpp"
#include "baryopt/random.hpp"
#include "baryopt/special.hpp"
#include "oracles.hpp"

using baryopt::CounterRng;
using baryopt::CutLocusError;
using baryopt::Grassmann;
using Matrix = Eigen::MatrixXcd;

namespace {
constexpr double kPi = std::numbers::pi;

Grassmann::Point coordinate_plane(const Grassmann& m, std::initializer_list<int> axes) {
    Matrix basis = Matrix::Zero(m.ambient_dim(), m.subspace_dim());
    int c = 0;
    for (int a : axes) basis(a, c++) = 1.0;
    return m.span_point(basis);
}

// independent principal-angle oracle: arccos of the singular values of the
// overlap of explicitly supplied orthonormal bases
double principal_angle_distance_oracle(const Matrix& a, const Matrix& b) {
    Eigen::JacobiSVD<Matrix> svd(a.adjoint() * b);
    double acc = 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        const double th = std::acos(std::min(1.0, std::max(0.0, svd.singularValues()[i])));
        acc += th * th;
    }
    return std::sqrt(acc);
}

// Affine-chart quadrature oracle for the volume of Gr(1, C^{m+1}):
// z in C^m maps to the projector onto (1, z); the chart density depends on
// |z| only (unitary invariance), so the volume reduces to a radial integral.
double projective_volume_chart_oracle(int m) {
    const int dim = 2 * m;
    auto projector = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXcd v(m + 1);
        v[0] = 1.0;
        for (int j = 0; j < m; ++j) v[j + 1] = std::complex<double>(x[2 * j], x[2 * j + 1]);
        v /= v.norm();
        return Matrix(v * v.adjoint());
    };
    auto density = [&](double r) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
        x[0] = r;
        const double h = 1e-5;
        std::vector<Matrix> d(dim);
        for (int a = 0; a < dim; ++a) {
            Eigen::VectorXd xp = x, xm = x;
            xp[a] += h;
            xm[a] -= h;
            d[a] = (projector(xp) - projector(xm)) / (2.0 * h);
        }
        Eigen::MatrixXd gram(dim, dim);
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < dim; ++b) {
                gram(a, b) = 0.5 * (d[a].cwiseProduct(d[b].conjugate())).sum().real();
            }
        }
        return std::sqrt(std::max(0.0, gram.determinant()));
    };
    // vol = area(S^{2m-1}) * int_0^inf density(r) r^{2m-1} dr, r = tan(phi)
    auto integrand = [&](double phi) {
        const double r = std::tan(phi);
        const double sec2 = 1.0 + r * r;
        return density(r) * std::pow(r, 2 * m - 1) * sec2;
    };
    return baryopt::unit_sphere_area(2 * m) *
           oracles::adaptive_simpson(integrand, 1e-8, 0.5 * kPi - 1e-8, 1e-6, 18);
}
}  // namespace

TEST(GrassmannDescriptor, StoredConstants) {
    const Grassmann g24(2, 4);
    EXPECT_EQ(g24.dim(), 8);
    EXPECT_EQ(g24.rank(), 2);
    EXPECT_DOUBLE_EQ(g24.kappa_sq(), 4.0);
    EXPECT_DOUBLE_EQ(g24.r_cx(), 0.25 * kPi);
    EXPECT_DOUBLE_EQ(g24.injectivity_radius(), 0.5 * kPi);
    EXPECT_NEAR(g24.diameter(), 0.5 * kPi * std::sqrt(2.0), 1e-12);
    EXPECT_THROW(Grassmann(0, 3), std::invalid_argument);
    EXPECT_THROW(Grassmann(3, 3), std::invalid_argument);
}

TEST(GrassmannVolume, MatchesSphereAndChartOracles) {
    // Gr(1,C^2) is a round sphere of radius 1/2: area pi.
    EXPECT_NEAR(Grassmann(1, 2).volume(), kPi, 1e-12);
    // affine-chart quadrature oracle for the projective spaces
    EXPECT_NEAR(Grassmann(1, 3).volume(), projective_volume_chart_oracle(2),
                1e-3 * Grassmann(1, 3).volume());
    EXPECT_NEAR(Grassmann(1, 4).volume(), projective_volume_chart_oracle(3),
                1e-3 * Grassmann(1, 4).volume());
    // duality Gr(k, C^n) = Gr(n-k, C^n)
    EXPECT_NEAR(Grassmann(2, 5).volume(), Grassmann(3, 5).volume(), 1e-12);
    EXPECT_NEAR(Grassmann(2, 4).volume(), std::pow(kPi, 4) / 12.0, 1e-10);
}

TEST(GrassmannDistance, CoordinatePlanesMatchOracle) {
    const Grassmann m(1, 2);
    const auto p1 = coordinate_plane(m, {0});
    const auto p2 = coordinate_plane(m, {1});
    Matrix e1 = Matrix::Zero(2, 1), e2 = Matrix::Zero(2, 1);
    e1(0, 0) = 1.0;
    e2(1, 0) = 1.0;
    EXPECT_NEAR(m.distance(p1, p2), principal_angle_distance_oracle(e1, e2), 1e-12);
    EXPECT_NEAR(m.distance(p1, p2), 0.5 * kPi, 1e-12);
    EXPECT_DOUBLE_EQ(m.distance(p1, p1), 0.0);

    const Grassmann g(2, 4);
    EXPECT_NEAR(g.distance(coordinate_plane(g, {0, 1}), coordinate_plane(g, {2, 3})),
                g.diameter(), 1e-10);
    EXPECT_NEAR(g.distance(coordinate_plane(g, {0, 1}), coordinate_plane(g, {0, 2})),
                0.5 * kPi, 1e-10);
}

TEST(GrassmannDistance, SymmetryTriangleAndDiameterBound) {
    const Grassmann m(2, 4);
    CounterRng rng(31);
    double max_seen = 0.0;
    for (int i = 0; i < 600; ++i) {
        const auto x = m.random_uniform_point(rng);
        const auto y = m.random_uniform_point(rng);
        const auto z = m.random_uniform_point(rng);
        const double dxy = m.distance(x, y);
        EXPECT_NEAR(dxy, m.distance(y, x), 1e-10);
        EXPECT_LE(m.distance(x, z), dxy + m.distance(y, z) + 1e-10);
        EXPECT_LE(dxy, m.diameter() + 1e-9);
        max_seen = std::max(max_seen, dxy);
    }
    EXPECT_GT(max_seen, 0.8 * m.diameter());
}

TEST(GrassmannExp, RotationOracleOnLines) {
    const Grassmann m(1, 2);
    const auto p1 = coordinate_plane(m, {0});
    // tangent of norm pi/2 toward the e2 line
    Matrix v = Matrix::Zero(2, 2);
    v(0, 1) = 0.5 * kPi;
    v(1, 0) = 0.5 * kPi;
    const auto moved = m.exp_map(p1, m.make_tangent(p1, v));
    EXPECT_NEAR(m.distance(moved, coordinate_plane(m, {1})), 0.0, 1e-9);

    // against the explicit 2x2 rotation conjugation oracle at several angles
    for (double theta : {0.1, 0.4, 1.0, 1.5}) {
        Matrix vt = Matrix::Zero(2, 2);
        vt(0, 1) = theta;
        vt(1, 0) = theta;
        const auto pt = m.exp_map(p1, m.make_tangent(p1, vt));
        Matrix u(2, 2);
        u(0, 0) = std::cos(theta);
        u(0, 1) = -std::sin(theta);
        u(1, 0) = std::sin(theta);
        u(1, 1) = std::cos(theta);
        const Matrix expected = u * p1.coords * u.adjoint();
        EXPECT_LT((pt.coords - expected).cwiseAbs().maxCoeff(), 1e-10) << "theta=" << theta;
    }
}

TEST(GrassmannLog, RoundTripsAndNormEqualsDistance) {
    const Grassmann m(2, 4);
    CounterRng rng(32);
    for (int i = 0; i < 400; ++i) {
        const auto x = m.random_uniform_point(rng);
        const auto y = m.random_uniform_point(rng);
        const auto v = m.log_map(x, y);
        EXPECT_NEAR(m.norm(v), m.distance(x, y), 1e-9);
        EXPECT_LT(m.distance(m.exp_map(x, v), y), 1e-8);
    }
}

TEST(GrassmannLog, CutLocusRaises) {
    const Grassmann m(1, 2);
    EXPECT_THROW(m.log_map(coordinate_plane(m, {0}), coordinate_plane(m, {1})), CutLocusError);
}

TEST(GrassmannInterpolate, ProportionalityMinimalityTieBreak) {
    const Grassmann m(2, 4);
    CounterRng rng(33);
    for (int i = 0; i < 200; ++i) {
        const auto x = m.random_uniform_point(rng);
        const auto z = m.random_uniform_point(rng);
        const double t = baryopt::uniform_double(rng);
        const auto g = m.geodesic_interpolate(x, z, t);
        EXPECT_NEAR(m.distance(x, g), t * m.distance(x, z), 1e-8);
        EXPECT_NEAR(m.distance(x, g) + m.distance(g, z), m.distance(x, z), 1e-8);
    }
    // orthogonal lines: the tie-break must still return a midpoint on some
    // minimising geodesic
    const Grassmann l(1, 2);
    const auto a = coordinate_plane(l, {0});
    const auto b = coordinate_plane(l, {1});
    const auto mid = l.geodesic_interpolate(a, b, 0.5);
    EXPECT_NEAR(l.distance(a, mid), 0.25 * kPi, 1e-6);
    EXPECT_NEAR(l.distance(mid, b), 0.25 * kPi, 1e-6);
}

TEST(GrassmannSymmetry, ClosedFormInvolutionIsometry) {
    const Grassmann m(2, 4);
    CounterRng rng(34);
    const auto c = m.random_uniform_point(rng);
    EXPECT_LT(m.distance(m.geodesic_symmetry(c, c), c), 1e-9);
    for (int i = 0; i < 200; ++i) {
        const auto x = m.random_uniform_point(rng);
        const auto y = m.random_uniform_point(rng);
        const auto sx = m.geodesic_symmetry(c, x);
        const auto sy = m.geodesic_symmetry(c, y);
        EXPECT_LT(m.distance(m.geodesic_symmetry(c, sx), x), 1e-8);
        EXPECT_NEAR(m.distance(sx, sy), m.distance(x, y), 1e-8);
        // agrees with exp(-log) where the log exists
        if (m.distance(c, x) < m.injectivity_radius() - 0.1) {
            const auto via_log = m.exp_map(c, m.scale_tangent(m.log_map(c, x), -1.0));
            EXPECT_LT(m.distance(sx, via_log), 1e-7);
        }
    }
}

TEST(GrassmannInvariants, ProjectorPreservedAcrossChainedOps) {
    const Grassmann m(2, 4);
    CounterRng rng(35);
    auto x = m.random_uniform_point(rng);
    const auto c = m.random_uniform_point(rng);
    for (int i = 0; i < 2000; ++i) {
        switch (i % 3) {
            case 0: {
                const auto v = m.random_unit_tangent(rng, x);
                x = m.exp_map(x, m.scale_tangent(v, 0.3));
                break;
            }
            case 1:
                x = m.geodesic_symmetry(c, x);
                break;
            default:
                x = m.geodesic_interpolate(x, c, 0.25);
        }
    }
    EXPECT_NO_THROW(m.check_point(x));
}

TEST(GrassmannTangents, BasisOrthonormalAndBlockStructure) {
    const Grassmann m(2, 4);
    CounterRng rng(36);
    const auto x = m.random_uniform_point(rng);
    const auto basis = m.tangent_basis(x);
    ASSERT_EQ(static_cast<int>(basis.size()), m.dim());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& v = basis[i].vec;
        EXPECT_LT((v - v.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        const Matrix onblock = x.coords * v * x.coords;
        EXPECT_LT(onblock.cwiseAbs().maxCoeff(), 1e-10);
        for (std::size_t j = 0; j <= i; ++j) {
            EXPECT_NEAR(m.inner(basis[i], basis[j]), i == j ? 1.0 : 0.0, 1e-10);
        }
    }
}

TEST(GrassmannCurvature, ConstantFourOnLinesInC2) {
    const Grassmann m(1, 2);
    CounterRng rng(37);
    for (int rep = 0; rep < 5; ++rep) {
        const auto x = m.random_uniform_point(rng);
        const auto basis = m.tangent_basis(x);
        const double k = baryopt::sectional_curvature_probe(m, basis[0], basis[1]);
        EXPECT_NEAR(k, 4.0, 1e-3);
    }
}

TEST(GrassmannCurvature, ProbeNeverExceedsStoredBound) {
    const Grassmann m(2, 4);
    CounterRng rng(38);
    double max_seen = -1e9;
    for (int rep = 0; rep < 40; ++rep) {
        const auto x = m.random_uniform_point(rng);
        const auto u = m.random_unit_tangent(rng, x);
        auto w = m.random_unit_tangent(rng, x);
        // orthonormalize w against u
        Matrix raw = w.vec - m.inner(w, u) * u.vec;
        auto v = m.make_tangent(x, raw);
        const double nv = m.norm(v);
        if (nv < 1e-6) continue;
        v = m.scale_tangent(v, 1.0 / nv);
        const double k = baryopt::sectional_curvature_probe(m, u, v);
        EXPECT_LE(k, m.kappa_sq() + 1e-3);
        EXPECT_GE(k, -1e-3);
        max_seen = std::max(max_seen, k);
    }
    EXPECT_GT(max_seen, 0.5);
}

TEST(GrassmannPolarChart, HaarAngleStatisticMatchesRootDensity) {
    // E[d^2(z, x0)] for Haar z against the polar-chart prediction
    // int (t1^2+t2^2) J / int J with J from the stored root data.
    const Grassmann m(2, 4);
    const auto rd = m.root_data();
    const auto nodes = baryopt::gauss_legendre_nodes(64);
    auto jac = [&](double t1, double t2) {
        double j = 1.0;
        for (const auto& root : rd.roots) {
            const double lam = root.coeffs[0] * t1 + root.coeffs[1] * t2;
            j *= std::pow(std::sin(lam) * std::sin(lam), 0.5 * root.multiplicity);
        }
        return j;
    };
    double zn = 0.0, num = 0.0;
    const double half = 0.5 * rd.box_upper;
    for (const auto& [xa, wa] : nodes) {
        for (const auto& [xb, wb] : nodes) {
            const double t1 = half * (xa + 1.0);
            const double t2 = half * (xb + 1.0);
            const double j = jac(t1, t2) * wa * wb;
            zn += j;
            num += (t1 * t1 + t2 * t2) * j;
        }
    }
    const double predicted = num / zn;

    CounterRng rng(39);
    const auto x0 = m.random_uniform_point(rng);
    const int n = 20000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = m.distance(x0, m.random_uniform_point(rng));
        s1 += d * d;
        s2 += d * d * d * d;
    }
    const double mean = s1 / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, predicted, 5.0 * se);
}

TEST(GrassmannPoints, ValidationRejectsBadMatrices) {
    const Grassmann m(2, 4);
    Matrix bad = Matrix::Zero(4, 4);
    bad(0, 1) = 1.0;  // not Hermitian
    EXPECT_THROW(m.check_point(Grassmann::Point{bad}), std::invalid_argument);
    Matrix half = Matrix::Identity(4, 4) * 0.5;  // Hermitian, not idempotent
    EXPECT_THROW(m.check_point(Grassmann::Point{half}), std::invalid_argument);
    const auto ok = coordinate_plane(m, {1, 3});
    EXPECT_NO_THROW(m.check_point(ok));
}
