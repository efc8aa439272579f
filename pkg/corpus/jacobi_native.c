/* Hand-written Jacobi reference: same stencil, same iteration order,
 * same summation order as the generated kernels, so the residual is
 * comparable bit for bit.  Markers bracket the compute loop only; the
 * elapsed time between them is self-measured and reported on stderr so
 * the harness never depends on pipe arrival times. */

#define _POSIX_C_SOURCE 199309L /* clock_gettime under -std=c99 */

#include <stdio.h>
#include <stdlib.h>
#include <time.h>

static double now_s(void) {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (double)ts.tv_sec + (double)ts.tv_nsec * 1e-9;
}

#ifndef NX
#define NX 100
#endif
#ifndef MAX_ITERS
#define MAX_ITERS 10000
#endif

static double stencil(double left, double right) {
    return 0.5 * (left + right);
}

int main(void) {
    static double u[NX];
    static double u_new[NX];
    double norm = 0.0;
    u[0] = 10.0;
    u_new[0] = 10.0;
    printf("start\n");
    fflush(stdout);
    double t0 = now_s();
    for (long it = 0; it < MAX_ITERS; it++) {
        norm = 0.0;
        for (long i = 1; i < NX - 1; i++) {
            u_new[i] = stencil(u[i - 1], u[i + 1]);
            double diff = u_new[i] - u[i];
            norm = norm + diff * diff;
        }
        for (long i = 1; i < NX - 1; i++)
            u[i] = u_new[i];
    }
    double t1 = now_s();
    printf("stop\n");
    fflush(stdout);
    printf("%.17g\n", norm);
    fprintf(stderr, "elapsed %.9f\n", t1 - t0);
    return 0;
}
