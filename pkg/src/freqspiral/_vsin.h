/* Elementwise sin over a contiguous buffer.
 *
 * Uses glibc's libmvec AVX2 variant when built with FS_USE_MVEC and the CPU
 * supports AVX2; otherwise scalar libm sin. Either path is deterministic for a
 * given machine. libmvec is accurate to 4 ulp.
 */
#ifndef FS_VSIN_H
#define FS_VSIN_H

#include <math.h>
#include <stddef.h>

static void fs_vsin_scalar(const double *x, double *y, ptrdiff_t n)
{
    for (ptrdiff_t i = 0; i < n; i++)
        y[i] = sin(x[i]);
}

#if defined(FS_USE_MVEC) && defined(__x86_64__) && defined(__GNUC__)
#include <immintrin.h>

__m256d _ZGVdN4v_sin(__m256d);

__attribute__((target("avx2")))
static void fs_vsin_avx2(const double *x, double *y, ptrdiff_t n)
{
    ptrdiff_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _ZGVdN4v_sin(_mm256_loadu_pd(x + i)));
    for (; i < n; i++)
        y[i] = sin(x[i]);
}

static int fs_vsin_mode = -1;

static int fs_vsin_vectorized(void)
{
    if (fs_vsin_mode < 0) {
        __builtin_cpu_init();
        fs_vsin_mode = __builtin_cpu_supports("avx2") ? 1 : 0;
    }
    return fs_vsin_mode;
}

static void fs_vsin(const double *x, double *y, ptrdiff_t n)
{
    if (fs_vsin_vectorized())
        fs_vsin_avx2(x, y, n);
    else
        fs_vsin_scalar(x, y, n);
}
#else
static int fs_vsin_vectorized(void) { return 0; }

static void fs_vsin(const double *x, double *y, ptrdiff_t n)
{
    fs_vsin_scalar(x, y, n);
}
#endif

#endif
