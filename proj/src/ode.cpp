#include "slts/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace slts {

void SolutionState::normalize() {
    const double m = std::max(std::abs(y), std::abs(yp));
    if (m == 0.0 || !std::isfinite(m)) return;
    y /= m;
    yp /= m;
    log_scale += std::log(m);
}

Complex wronskian(const SolutionState& u, const SolutionState& v) {
    return (u.y * v.yp - u.yp * v.y) * std::exp(u.log_scale + v.log_scale);
}

namespace {

// Dormand-Prince 8(5,3) tableau (Hairer, Norsett & Wanner).
constexpr double c2 = 0.526001519587677318785587544488E-01, c3 = 0.789002279381515978178381316732E-01,
                 c4 = 0.118350341907227396726757197510E+00, c5 = 0.281649658092772603273242802490E+00,
                 c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                 c8 = 0.307692307692307692307692307692E+00, c9 = 0.651282051282051282051282051282E+00,
                 c10 = 0.6E+00, c11 = 0.857142857142857142857142857142E+00;
constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                 b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                 b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                 b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;
constexpr double a21 = 5.26001519587677318785587544488E-2, a31 = 1.97250569845378994544595329183E-2,
                 a32 = 5.91751709536136983633785987549E-2, a41 = 2.95875854768068491816892993775E-2,
                 a43 = 8.87627564304205475450678981324E-2, a51 = 2.41365134159266685502369798665E-1,
                 a53 = -8.84549479328286085344864962717E-1, a54 = 9.24834003261792003115737966543E-1,
                 a61 = 3.7037037037037037037037037037E-2, a64 = 1.70828608729473871279604482173E-1,
                 a65 = 1.25467687566822425016691814123E-1, a71 = 3.7109375E-2,
                 a74 = 1.70252211019544039314978060272E-1, a75 = 6.02165389804559606850219397283E-2,
                 a76 = -1.7578125E-2, a81 = 3.70920001185047927108779319836E-2,
                 a84 = 1.70383925712239993810214054705E-1, a85 = 1.07262030446373284651809199168E-1,
                 a86 = -1.53194377486244017527936158236E-2, a87 = 8.27378916381402288758473766002E-3,
                 a91 = 6.24110958716075717114429577812E-1, a94 = -3.36089262944694129406857109825E0,
                 a95 = -8.68219346841726006818189891453E-1, a96 = 2.75920996994467083049415600797E1,
                 a97 = 2.01540675504778934086186788979E1, a98 = -4.34898841810699588477366255144E1,
                 a101 = 4.77662536438264365890433908527E-1, a104 = -2.48811461997166764192642586468E0,
                 a105 = -5.90290826836842996371446475743E-1, a106 = 2.12300514481811942347288949897E1,
                 a107 = 1.52792336328824235832596922938E1, a108 = -3.32882109689848629194453265587E1,
                 a109 = -2.03312017085086261358222928593E-2, a111 = -9.3714243008598732571704021658E-1,
                 a114 = 5.18637242884406370830023853209E0, a115 = 1.09143734899672957818500254654E0,
                 a116 = -8.14978701074692612513997267357E0, a117 = -1.85200656599969598641566180701E1,
                 a118 = 2.27394870993505042818970056734E1, a119 = 2.49360555267965238987089396762E0,
                 a1110 = -3.0467644718982195003823669022E0, a121 = 2.27331014751653820792359768449E0,
                 a124 = -1.05344954667372501984066689879E1, a125 = -2.00087205822486249909675718444E0,
                 a126 = -1.79589318631187989172765950534E1, a127 = 2.79488845294199600508499808837E1,
                 a128 = -2.85899827713502369474065508674E0, a129 = -8.87285693353062954433549289258E0,
                 a1210 = 1.23605671757943030647266201528E1, a1211 = 6.43392746015763530355970484046E-1;
constexpr double bhh1 = 0.244094488188976377952755905512E+00, bhh2 = 0.733846688281611857341361741547E+00,
                 bhh3 = 0.220588235294117647058823529412E-01;
constexpr double er1 = 0.1312004499419488073250102996E-01, er6 = -0.1225156446376204440720569753E+01,
                 er7 = -0.4957589496572501915214079952E+00, er8 = 0.1664377182454986536961530415E+01,
                 er9 = -0.3503288487499736816886487290E+00, er10 = 0.3341791187130174790297318841E+00,
                 er11 = 0.8192320648511571246570742613E-01, er12 = -0.2235530786388629525884427845E-01;

struct Vec2 {
    Complex y, yp;
    Vec2 operator+(const Vec2& o) const { return {y + o.y, yp + o.yp}; }
    Vec2 operator*(double s) const { return {y * s, yp * s}; }
};

class LinearSystem {
public:
    LinearSystem(const ChebSeries& q, Complex lambda) : q_(q), lambda_(lambda) {}
    Vec2 operator()(double x, const Vec2& w) const { return {w.yp, (q_(x) - lambda_) * w.y}; }

private:
    const ChebSeries& q_;
    Complex lambda_;
};

}  // namespace

SolutionState integrate(const ChebSeries& q, Complex lambda, SolutionState state, double x_from,
                        double x_to, const IntegratorOptions& opts) {
    if (x_from == x_to) return state;
    const LinearSystem f(q, lambda);
    const double rho_abs = std::sqrt(std::abs(lambda));
    const double wscale = 1.0 + rho_abs;  // weights y so both components carry comparable size
    const double span = std::abs(x_to - x_from);
    const double dir = x_to > x_from ? 1.0 : -1.0;
    const double h_max = std::min(span, 0.5 / wscale);

    auto norm = [wscale](const Vec2& v) { return std::hypot(wscale * std::abs(v.y), std::abs(v.yp)); };

    state.normalize();
    Vec2 w{state.y, state.yp};
    double log_scale = state.log_scale;
    double x = x_from;
    double h = h_max;
    Vec2 k1 = f(x, w);
    std::size_t steps = 0;
    bool last = false;

    while (true) {
        if (++steps > opts.max_steps) {
            std::ostringstream os;
            os << "integrator: step limit exceeded at x=" << x << " for lambda=" << lambda;
            throw Error(Errc::kIntegration, os.str());
        }
        if (0.1 * h <= std::abs(x) * 2.3e-16 || h < 1e-14 * span) {
            std::ostringstream os;
            os << "integrator: step size underflow at x=" << x << " for lambda=" << lambda;
            throw Error(Errc::kIntegration, os.str());
        }
        if ((x + dir * 1.01 * h - x_to) * dir >= 0.0) {
            h = std::abs(x_to - x);
            last = true;
        }
        const double hs = dir * h;
        const Vec2 k2 = f(x + c2 * hs, w + k1 * (hs * a21));
        const Vec2 k3 = f(x + c3 * hs, w + (k1 * a31 + k2 * a32) * hs);
        const Vec2 k4 = f(x + c4 * hs, w + (k1 * a41 + k3 * a43) * hs);
        const Vec2 k5 = f(x + c5 * hs, w + (k1 * a51 + k3 * a53 + k4 * a54) * hs);
        const Vec2 k6 = f(x + c6 * hs, w + (k1 * a61 + k4 * a64 + k5 * a65) * hs);
        const Vec2 k7 = f(x + c7 * hs, w + (k1 * a71 + k4 * a74 + k5 * a75 + k6 * a76) * hs);
        const Vec2 k8 = f(x + c8 * hs, w + (k1 * a81 + k4 * a84 + k5 * a85 + k6 * a86 + k7 * a87) * hs);
        const Vec2 k9 = f(x + c9 * hs,
                          w + (k1 * a91 + k4 * a94 + k5 * a95 + k6 * a96 + k7 * a97 + k8 * a98) * hs);
        const Vec2 k10 = f(x + c10 * hs, w + (k1 * a101 + k4 * a104 + k5 * a105 + k6 * a106 + k7 * a107 +
                                              k8 * a108 + k9 * a109) * hs);
        const Vec2 k11 = f(x + c11 * hs, w + (k1 * a111 + k4 * a114 + k5 * a115 + k6 * a116 + k7 * a117 +
                                              k8 * a118 + k9 * a119 + k10 * a1110) * hs);
        const double x_new = last ? x_to : x + hs;
        const Vec2 k12 = f(x_new, w + (k1 * a121 + k4 * a124 + k5 * a125 + k6 * a126 + k7 * a127 +
                                       k8 * a128 + k9 * a129 + k10 * a1210 + k11 * a1211) * hs);
        const Vec2 kb = k1 * b1 + k6 * b6 + k7 * b7 + k8 * b8 + k9 * b9 + k10 * b10 + k11 * b11 + k12 * b12;
        const Vec2 w_new = w + kb * hs;

        // Normwise relative error, combining the 5th- and 3rd-order estimators.
        const double sk = opts.rtol * std::max(norm(w), norm(w_new));
        const double e5 = norm(k1 * er1 + k6 * er6 + k7 * er7 + k8 * er8 + k9 * er9 + k10 * er10 +
                               k11 * er11 + k12 * er12) / sk;
        const double e3 = norm(kb + k1 * (-bhh1) + k9 * (-bhh2) + k3 * (-bhh3)) / sk;
        const double e5s = e5 * e5, e3s = e3 * e3;
        const double deno = e5s + 0.01 * e3s;
        const double err = deno > 0.0 ? h * e5s / std::sqrt(deno) : 0.0;

        const double fac = std::clamp(std::pow(err, 0.125) / 0.9, 1.0 / 6.0, 1.0 / 0.333);
        double h_new = std::min(h / fac, h_max);

        if (err <= 1.0) {
            w = w_new;
            x = x_new;
            const double m = std::max(std::abs(w.y), std::abs(w.yp));
            if (m > 0.0 && std::isfinite(m)) {
                w = w * (1.0 / m);
                log_scale += std::log(m);
            }
            if (last) break;
            k1 = f(x, w);
        } else {
            last = false;
        }
        h = h_new;
    }
    return SolutionState{w.y, w.yp, log_scale};
}

}  // namespace slts
