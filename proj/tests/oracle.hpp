// SPDX-License-Identifier: Apache-2.0
// Straight scalar-loop references, written without the library's kernels.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

inline double softplus(double l) { return l > 30 ? l : std::log(1.0 + std::exp(l)); }

inline double uncertainty(const std::vector<double>& logits) {
    double s = 0;
    for (double l : logits) s += softplus(l) + 1.0;
    return static_cast<double>(logits.size()) / s;
}

inline std::pair<double, double> mean_std(const std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double var = 0;
    for (double v : x) var += (v - m) * (v - m);
    return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

// Full stable sort by (-score, index), then the first k sorted ascending.
inline std::vector<std::size_t> topk(const std::vector<float>& s, std::size_t k) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// u <- tau*u + I; fire at u >= v_th; hard reset. currents[t][i].
inline std::vector<std::vector<int>> lif(const std::vector<std::vector<float>>& currents, float tau, float v_th) {
    std::vector<std::vector<int>> out;
    std::vector<float> u(currents.empty() ? 0 : currents[0].size(), 0.0f);
    for (const auto& cur : currents) {
        std::vector<int> s(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const float a = tau * u[i];
            u[i] = a + cur[i];
            s[i] = u[i] >= v_th;
            if (s[i]) u[i] = 0.0f;
        }
        out.push_back(s);
    }
    return out;
}

// Row-major [m,k] x [k,p] in float with ascending-k accumulation.
inline std::vector<float> matmul(const std::vector<float>& a, const std::vector<float>& w, std::size_t m,
                                 std::size_t k, std::size_t p) {
    std::vector<float> out(m * p, 0.0f);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            float acc = 0.0f;
            for (std::size_t q = 0; q < k; ++q) {
                if (a[i * k + q] != 0.0f) acc += a[i * k + q] * w[q * p + j];
            }
            out[i * p + j] = acc;
        }
    }
    return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return na == 0 || nb == 0 ? 0.0 : d / std::sqrt(na * nb);
}

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace oracle
