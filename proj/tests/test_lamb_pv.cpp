#include <catch_amalgamated.hpp>

#include "gse/lamb_pv.hpp"
#include "gse/single.hpp"
#include "support.hpp"

using namespace gse;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace ts = test_support;

namespace {

// x, Si, Ci, A+, B+, A-, B- at 30 significant digits, rounded to 20.
struct Frozen {
    double x, si, ci, ap, bp, am, bm;
};
constexpr Frozen frozen[] = {
    {0.5, 0.49310741804306668916, -0.17778407880661290134, -0.67269179286854911156, 1.1394732342738414377,
     -0.83346795715374485004, 3.8964801636271464153},
    {1.0, 0.94608307036718301494, 0.33740392290096813466, -0.34337796155642703283, 0.37855037576418664236,
     -2.3001811025250291461, 2.0759601305971598121},
    {2.0, 1.6054129768026948486, 0.4229808287748649957, -0.14454530303733242046, 0.10097901140581615311,
     -2.7120968130063317796, -1.2063848331053188484},
    {5.0, 1.5499312449446741373, -0.19002974965664387862, -0.033896220611621764766, 0.011857225428581776297,
     3.046445677242258682, 0.90300826338107884942},
    {10.0, 1.6583475942188740493, -0.045456433004455372635, -0.0094885390163548074071, 0.0018089649898298312665,
     1.7185812643841572818, -2.6342119865931077825},
    {30.0, 1.566756540030351111, -0.033032417282071143779, -0.0011038611810884164194, 0.000073117472747648891024,
     3.1050967529456151769, 0.48466833924515584072},
    {100.0, 1.5622254668890562934, -0.0051488251426104921444, -0.000099940119499589493169, 1.9976071600381751317e-6,
     1.5908945182602036136, 2.7090566318379830282},
};

// Plus branch as non-oscillatory Laplace integrals: with 1/(u+1) = int e^{-(u+1)s} ds,
//   int cos(xu)/(u+1) du = int e^{-s} s/(s^2+x^2) ds,  int sin(xu)/(u+1) du = int e^{-s} x/(s^2+x^2) ds.
std::pair<double, double> plus_branch_laplace(double x) {
    auto c = [x](double s) { return std::exp(-s) * s / (s * s + x * x); };
    auto s = [x](double t) { return std::exp(-t) * x / (t * t + x * x); };
    double ic = 0.0, is = 0.0;
    for (double a = 0.0; a < 60.0; a += 1.0) {
        ic += ts::integrate(c, a, a + 1.0);
        is += ts::integrate(s, a, a + 1.0);
    }
    return {-ic, 1.0 / x - is};
}

// Minus branch by shifting the pole to the origin:
//   PV int cos(xu)/(u-1) du = -cos x Ci(x) - sin x (Si(x) + pi/2), similarly for sin.
// Si and Ci come from direct quadrature, not from the library.
std::pair<double, double> minus_branch_shifted(double x) {
    const double s = ts::si_quad(x), c = ts::ci_quad(x);
    return {-std::cos(x) * c - std::sin(x) * (s + pi / 2), 1.0 / x - std::sin(x) * c + std::cos(x) * (s + pi / 2)};
}

}  // namespace

TEST_CASE("sine and cosine integrals against frozen high-precision values", "[special]") {
    for (const auto& r : frozen) {
        INFO("x = " << r.x);
        CHECK_THAT(special::si(r.x), WithinAbs(r.si, 1e-14));
        CHECK_THAT(special::ci(r.x), WithinAbs(r.ci, 1e-14));
    }
}

TEST_CASE("sine and cosine integrals against direct quadrature", "[special]") {
    for (double x : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        INFO("x = " << x);
        CHECK_THAT(special::si(x), WithinAbs(ts::si_quad(x), 1e-10));
        CHECK_THAT(special::ci(x), WithinAbs(ts::ci_quad(x), 1e-10));
    }
}

TEST_CASE("sine integral limits and symmetry", "[special]") {
    CHECK(special::si(0.0) == 0.0);
    CHECK_THAT(special::si(1e3), WithinAbs(pi / 2, 1e-3));
    CHECK_THAT(special::si(1e6), WithinAbs(pi / 2, 1e-6));
    for (double x : {0.3, 3.9, 4.1, 17.0}) CHECK(special::si(-x) == -special::si(x));
    // Both sides of the series / continued-fraction switch.
    CHECK_THAT(special::si(4.0 - 1e-12), WithinAbs(special::si(4.0 + 1e-12), 1e-11));
    CHECK_THAT(special::ci(4.0 - 1e-12), WithinAbs(special::ci(4.0 + 1e-12), 1e-11));
}

TEST_CASE("cosine integral has a logarithmic singularity at 0", "[special]") {
    CHECK_THROWS_AS(special::ci(0.0), ConfigError);
    CHECK_THROWS_AS(special::ci(-1.0), ConfigError);
    for (double x : {1e-2, 1e-4, 1e-8}) CHECK_THAT(special::ci(x) - std::log(x), WithinAbs(ts::euler_gamma, x));
}

TEST_CASE("closed forms against frozen values", "[pv]") {
    for (const auto& r : frozen) {
        INFO("x = " << r.x);
        const auto p = pv_closed(r.x, Branch::plus), m = pv_closed(r.x, Branch::minus);
        CHECK_THAT(p.a, WithinAbs(r.ap, 1e-13));
        CHECK_THAT(p.b, WithinAbs(r.bp, 1e-13));
        CHECK_THAT(m.a, WithinAbs(r.am, 1e-13));
        CHECK_THAT(m.b, WithinAbs(r.bm, 1e-13));
        CHECK_THAT(p.a_over_pi(), WithinRel(r.ap / pi, 1e-12));
    }
}

TEST_CASE("plus branch matches the pole-free Laplace form", "[pv]") {
    for (double x : {0.5, 0.9, 2.0, 7.5, 20.0, 50.0}) {
        INFO("x = " << x);
        const auto [a, b] = plus_branch_laplace(x);
        const auto c = pv_closed(x, Branch::plus);
        CHECK_THAT(c.a, WithinAbs(a, 1e-11));
        CHECK_THAT(c.b, WithinAbs(b, 1e-11));
        const auto q = pv_quadrature(x, Branch::plus);
        CHECK_THAT(q.a, WithinAbs(a, 1e-6));
        CHECK_THAT(q.b, WithinAbs(b, 1e-6));
    }
}

TEST_CASE("minus branch matches the shifted-pole form", "[pv]") {
    for (double x : {0.5, 1.0, 3.0, 6.2, 12.0, 33.0}) {
        INFO("x = " << x);
        const auto [a, b] = minus_branch_shifted(x);
        const auto c = pv_closed(x, Branch::minus);
        CHECK_THAT(c.a, WithinAbs(a, 1e-10));
        CHECK_THAT(c.b, WithinAbs(b, 1e-10));
    }
}

TEST_CASE("closed forms agree with the PV quadrature", "[pv]") {
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
        const double x = 0.5 + (50.0 - 0.5) * k / 39.0;
        for (auto br : {Branch::plus, Branch::minus}) {
            const auto c = pv_closed(x, br), q = pv_quadrature(x, br);
            worst = std::max({worst, std::abs(c.a - q.a), std::abs(c.b - q.b)});
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("parity and large-argument decay", "[pv]") {
    for (double x : {0.7, 3.0, 11.0}) {
        for (auto br : {Branch::plus, Branch::minus}) {
            CHECK_THAT(pv_closed(-x, br).a, WithinAbs(pv_closed(x, br).a, 1e-15));
            CHECK_THAT(pv_closed(-x, br).b, WithinAbs(-pv_closed(x, br).b, 1e-15));
        }
        CHECK(pv_n(-x) == -pv_n(x));
        CHECK(pv_m(-x) == pv_m(x));
    }
    CHECK(std::abs(pv_m(100.0)) < 0.02);
    CHECK(std::abs(pv_n(100.0)) < 0.02);
    CHECK_THAT(pv_m(100.0), WithinRel(1.0 / (pi * 1e4), 1e-3));
    CHECK_THAT(pv_n(100.0), WithinRel(1.0 / (pi * 100.0), 1e-3));
}

TEST_CASE("zero argument diverges", "[pv]") {
    CHECK_THROWS_AS(pv_closed(0.0, Branch::plus), NumericError);
    CHECK_THROWS_AS(pv_quadrature(0.0, Branch::minus), NumericError);
    CHECK_THROWS_AS(pv_m(0.0), NumericError);
    CHECK_THROWS_AS(pv_n(0.0), NumericError);
}

TEST_CASE("quadrature reports a failed extrapolation", "[pv]") {
    PvQuadratureOptions opt;
    opt.tolerance = 1e-30;
    CHECK_THROWS_AS(pv_quadrature(3.0, Branch::minus, opt), NumericError);
    opt = {};
    opt.alpha_levels = 1;
    CHECK_THROWS_AS(pv_quadrature(3.0, Branch::minus, opt), ConfigError);
}

TEST_CASE("decay and shift decomposition", "[pv]") {
    auto d = decay_shift_decomposition(0.0);
    CHECK(d.decay == two_pi);
    CHECK(d.shift == 0.0);
    d = decay_shift_decomposition(pi);
    CHECK_THAT(d.decay, WithinRel(-two_pi, 1e-15));
    CHECK_THAT(d.shift, WithinAbs(0.0, 1e-15));
    for (double x = -7.0; x < 7.0; x += 0.37) {
        const auto e = decay_shift_decomposition(x);
        REQUIRE_THAT(std::pow(e.decay / two_pi, 2) + std::pow(e.shift / pi, 2), WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("pairwise decomposition assembles the single-emitter rates", "[pv]") {
    const Waveguide wg(3.26e7);
    for (double f : {4.1e9, 4.33e9, 4.35e9, 4.96e9}) {
        const SingleGseParams p{0.76e6, 1.58e6, 0.0828, f, wg};
        const auto r = assemble_two_point(p.kappa_hz, p.phase_at(f));
        CHECK_THAT(r.decay_hz, WithinAbs(giant_decay(p, f), 1e-12 * 4 * p.kappa_hz));
        CHECK_THAT(r.shift_hz, WithinAbs(lamb_shift(p, f), 1e-12 * p.kappa_hz));
    }
}
