#include <cassert>
#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace charm::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, "scalar", &detail::dot_scalar, &detail::axpy_scalar,
                              &detail::adam_scalar};

#if defined(CHARM_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, "avx2", &detail::dot_avx2, &detail::axpy_avx2, &detail::adam_avx2};
#endif

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("CHARM_KERNELS")) {
        if (std::string_view(forced) == "scalar") return kScalar;
    }
    if (const KernelTable* t = table_for(Isa::Avx2)) return *t;
    return kScalar;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

bool cpu_supports(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(CHARM_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* table_for(Isa isa) noexcept {
    if (!cpu_supports(isa)) return nullptr;
    switch (isa) {
        case Isa::Scalar:
            return &kScalar;
        case Isa::Avx2:
#if defined(CHARM_HAVE_AVX2)
            return &kAvx2;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

void affine(const KernelTable& k, std::span<const double> weights, std::span<const double> bias,
            std::span<const double> x, std::span<double> y) {
    const std::size_t in = x.size();
    assert(weights.size() == y.size() * in && bias.size() == y.size());
    for (std::size_t o = 0; o < y.size(); ++o) y[o] = k.dot(weights.data() + o * in, x.data(), in) + bias[o];
}

void affine_transpose_accumulate(const KernelTable& k, std::span<const double> weights,
                                 std::span<const double> g, std::span<double> dx) {
    const std::size_t in = dx.size();
    assert(weights.size() == g.size() * in);
    for (std::size_t o = 0; o < g.size(); ++o) {
        if (g[o] != 0.0) k.axpy(g[o], weights.data() + o * in, dx.data(), in);
    }
}

void outer_accumulate(const KernelTable& k, std::span<const double> g, std::span<const double> x,
                      std::span<double> dweights) {
    const std::size_t in = x.size();
    assert(dweights.size() == g.size() * in);
    for (std::size_t o = 0; o < g.size(); ++o) {
        if (g[o] != 0.0) k.axpy(g[o], x.data(), dweights.data() + o * in, in);
    }
}

}  // namespace charm::kernels
