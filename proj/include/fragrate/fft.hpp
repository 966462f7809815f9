#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace fragrate::detail {

// Unnormalized complex DFT, sign -1 (forward) or +1 (backward).
// Plans are shared; fftw_execute_dft is thread safe, plan creation is not.
class DftPlans {
public:
    static DftPlans& instance() {
        static DftPlans plans;
        return plans;
    }

    void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int sign) {
        const std::size_t n = in.size();
        fftw_plan plan = get(n, sign);
        std::vector<std::complex<double>> buffer(in.begin(), in.end());
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buffer.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

    ~DftPlans() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    DftPlans() = default;

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> a(n), b(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                                          reinterpret_cast<fftw_complex*>(b.data()),
                                          sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline std::vector<std::complex<double>> dft(std::span<const std::complex<double>> in, int sign) {
    std::vector<std::complex<double>> out(in.size());
    if (!in.empty()) DftPlans::instance().execute(in, out, sign);
    return out;
}

}  // namespace fragrate::detail
