/* Compiles the public header as C and makes a few calls through it. */
#include <stdio.h>

#include "hotelling/hotelling.h"

int main(void) {
    hot_params params;
    hot_point sites[2] = {{0.25, 0.5}, {0.75, 0.5}};
    double prices[2];
    int converged = 0;
    hot_params_default(&params);
    if (hot_price_equilibrium(sites, 2, &params, prices, &converged) != HOT_OK || !converged) {
        fprintf(stderr, "price equilibrium failed: %s\n", hot_last_error());
        return 1;
    }
    if (prices[0] - prices[1] > 1e-6 || prices[1] - prices[0] > 1e-6) {
        fprintf(stderr, "asymmetric prices %g %g\n", prices[0], prices[1]);
        return 1;
    }
    printf("prices %.6f %.6f\n", prices[0], prices[1]);
    return 0;
}
