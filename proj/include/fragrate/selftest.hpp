#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "group_fourier.hpp"
#include "inverse_solver.hpp"
#include "kernels.hpp"
#include "transport_group.hpp"

namespace fragrate {

// Quick property checks of the installed library; one line per property.
inline int cmd_selftest(std::ostream& out) {
    struct Check {
        std::string name;
        std::function<bool(std::string&)> run;
    };
    const auto d = exponential();
    const auto grid = build_grid(-12.0, 12.0, 1024, d);
    auto gauss = [](double c, double w) {
        return [c, w](double x) { return std::exp(-(std::log(x) - c) * (std::log(x) - c) / (2.0 * w * w)); };
    };
    std::vector<Check> checks = {
        {"plancherel",
         [&](std::string& info) {
             auto f = sample(gauss(0.3, 0.8), grid);
             const double a = l2_norm(forward(f, 0.0)), b = haar_norm(f);
             const double rel = std::abs(a - b) / b;
             info = "relative difference " + std::to_string(rel);
             return rel <= 1e-8;
         }},
        {"round trip with weight",
         [&](std::string& info) {
             auto f = sample(gauss(-0.5, 0.7), grid);
             auto back = inverse(forward(f, 0.1));
             const double rel = haar_norm(back - f) / haar_norm(f);
             info = "relative difference " + std::to_string(rel);
             return rel <= 1e-8;
         }},
        {"convolution theorem (equal mitosis)",
         [&](std::string& info) {
             KernelConfig cfg{equal_mitosis(), 2.0, d, 0.0};
             auto H = sample(gauss(0.5, 0.6), grid);
             auto a = apply_K(H, cfg, KernelRoute::fourier).value;
             auto b = sample([&](double x) { return 2.0 * gauss(0.5, 0.6)(2.0 * x); }, grid);
             const double rel = haar_norm(a - b) / haar_norm(b);
             info = "relative difference " + std::to_string(rel);
             return rel <= 1e-6;
         }},
        {"hypothesis at s = 1",
         [&](std::string& info) {
             KernelConfig cfg{equal_mitosis(), 2.0, d, 1.0};
             auto r = check_hypothesis_lower_bound(cfg, {-5.0, 5.0}, 2001);
             info = "min " + std::to_string(r.min_value) + " vs 1 - 2^(2-pi) = " + std::to_string(1.0 - std::pow(2.0, 2.0 - M_PI));
             return r.passed && r.min_value >= 1.0 - std::pow(2.0, 2.0 - M_PI) - 1e-9;
         }},
        {"hypothesis fails at s = 2/pi",
         [&](std::string& info) {
             KernelConfig cfg{equal_mitosis(), 2.0, d, 2.0 / M_PI};
             auto r = check_hypothesis_lower_bound(cfg, {-5.0, 5.0}, 2001);
             info = "min " + std::to_string(r.min_value);
             return !r.passed;
         }},
        {"filter estimate tight at m = 1, alpha = 1",
         [&](std::string& info) {
             const double one[1] = {1.0};
             auto rep = lemma_bounds_check(one, one, log_spaced(1e-3, 1e6, 20001));
             info = "sup " + std::to_string(rep.second[0].sup);
             return std::abs(rep.second[0].sup - 0.5) <= 1e-6;
         }},
    };
    int failed = 0;
    for (auto& c : checks) {
        std::string info;
        bool ok = false;
        try {
            ok = c.run(info);
        } catch (const std::exception& e) {
            info = e.what();
        }
        out << (ok ? "pass  " : "FAIL  ") << c.name << "  (" << info << ")\n";
        failed += ok ? 0 : 1;
    }
    out << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks pass\n");
    return failed ? 1 : 0;
}

}  // namespace fragrate
