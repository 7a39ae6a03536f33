#pragma once

// Inner-loop arithmetic used by the dense layers and the optimizer.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The variant is chosen once per process from CPUID; setting the
// environment variable CHARM_KERNELS=scalar forces the reference path.
//
// The scalar and AVX2 Adam kernels perform the same IEEE operations in the
// same order and are bit-identical. dot/axpy use FMA and a different
// summation order on AVX2, so they agree with the reference only to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace charm::kernels {

enum class Isa { Scalar, Avx2 };

struct AdamCoeffs {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double bias_correction1;  // 1 - beta1^t
    double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
    Isa isa;
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*adam)(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoeffs& c);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* table_for(Isa isa) noexcept;

bool cpu_supports(Isa isa) noexcept;

// The process-wide selection.
const KernelTable& active() noexcept;

// y[o] = sum_i W[o, i] * x[i] + b[o], W row-major [out, in].
void affine(const KernelTable& k, std::span<const double> weights, std::span<const double> bias,
            std::span<const double> x, std::span<double> y);

// dx[i] += sum_o W[o, i] * g[o]
void affine_transpose_accumulate(const KernelTable& k, std::span<const double> weights,
                                 std::span<const double> g, std::span<double> dx);

// dW[o, i] += g[o] * x[i]
void outer_accumulate(const KernelTable& k, std::span<const double> g, std::span<const double> x,
                      std::span<double> dweights);

}  // namespace charm::kernels
