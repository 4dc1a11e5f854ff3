#pragma once

#include <stdexcept>
#include <vector>

namespace diskq {

// Shifted degrees of the factors of a word gamma_1 ... gamma_n; only parity
// enters signs.
struct KoszulContext {
    std::vector<int> degrees;
    int size() const { return (int)degrees.size(); }
};

// Koszul sign of the permutation sigma (one-line notation: position i holds
// sigma(i), 0-based) acting on factors with the given degrees:
// a_{sigma(0)} ... a_{sigma(n-1)} = sign * a_0 ... a_{n-1}.
// Computed by bubble sort; each adjacent swap of factors with degrees p, q
// contributes (-1)^{pq}.
inline int koszul_sign(std::vector<int> sigma, const KoszulContext& ctx) {
    if ((int)sigma.size() != ctx.size()) throw std::invalid_argument("koszul_sign: size mismatch");
    int sign = 1;
    int n = (int)sigma.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j + 1 < n; ++j)
            if (sigma[j] > sigma[j + 1]) {
                int p = ctx.degrees[sigma[j]] & 1;
                int q = ctx.degrees[sigma[j + 1]] & 1;
                if (p && q) sign = -sign;
                std::swap(sigma[j], sigma[j + 1]);
            }
    return sign;
}

// All (k, n-k) shuffles of {0..n-1} in one-line notation.
inline std::vector<std::vector<int>> shuffles(int k, int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> pick(k);
    // choose the k positions that go first, in increasing order
    std::vector<int> comb(k);
    for (int i = 0; i < k; ++i) comb[i] = i;
    auto emit = [&]() {
        std::vector<int> sigma;
        sigma.reserve(n);
        std::vector<bool> used(n, false);
        for (int i : comb) { sigma.push_back(i); used[i] = true; }
        for (int i = 0; i < n; ++i)
            if (!used[i]) sigma.push_back(i);
        out.push_back(std::move(sigma));
    };
    if (k == 0 || k == n) {
        std::vector<int> sigma(n);
        for (int i = 0; i < n; ++i) sigma[i] = i;
        out.push_back(sigma);
        return out;
    }
    while (true) {
        emit();
        int i = k - 1;
        while (i >= 0 && comb[i] == n - k + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
    return out;
}

} // namespace diskq
