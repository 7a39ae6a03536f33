#pragma once

#include "charm/kernels.hpp"

namespace charm::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void adam_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoeffs& c);

#if defined(CHARM_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void adam_avx2(double* param, const double* grad, double* m, double* v, std::size_t n,
               const AdamCoeffs& c);
#endif

}  // namespace charm::kernels::detail
