#include <math.h>
#include <stdio.h>
#include "zakharov.h"

int main(void) {
    enum { N = 16 };
    double re[N * N], im[N * N], n0[N * N], n1[N * N];
    const double L = 6.283185307179586, h = L / N;
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++) {
            double x = i * h - L / 2, y = j * h - L / 2, e = exp(-(x * x + y * y));
            re[i * N + j] = 0.1 * e;
            im[i * N + j] = 0.0;
            n0[i * N + j] = 0.05 * e;
            n1[i * N + j] = 0.0;
        }
    ZakGrid *g = NULL;
    ZakState *s = NULL;
    if (zak_grid_new(2, N, L, &g) != ZAK_STATUS_OK) return 2;
    if (zak_state_from_physical(g, 1.0, re, im, n0, n1, N * N, &s) != ZAK_STATUS_OK) return 3;
    double t, m0, m1;
    zak_state_invariants(s, NULL, &m0, NULL);
    if (zak_state_evolve(s, 0.01, 0.1, ZAK_SCHEME_STRANG_SPLIT, ZAK_NONLINEARITY_PHYSICAL) != ZAK_STATUS_OK) return 4;
    zak_state_invariants(s, &t, &m1, NULL);
    if (fabs(t - 0.1) > 1e-12 || fabs(m1 - m0) > 1e-12 * m0) return 5;
    if (zak_grid_new(9, N, L, &g) != ZAK_STATUS_INVALID_ARGUMENT) return 6;
    char msg[256];
    if (zak_last_error(msg, sizeof msg) == 0) return 7;
    zak_state_free(s);
    zak_grid_free(g);
    printf("ok %s\n", zak_version());
    return 0;
}
