/* Partition the signed unit vectors of R^4 under the 1-norm and print a certificate. */
#include <math.h>
#include <stdio.h>

#include "borsuk.h"

static int check(enum BorsukStatus status, const char *what) {
    if (status != BORSUK_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)status, borsuk_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    double coords[32] = {0};
    for (int i = 0; i < 4; i++) {
        coords[8 * i + i] = 1.0;
        coords[8 * i + 4 + i] = -1.0;
    }
    BorsukCloud *cloud = NULL;
    BorsukPartition *part = NULL;
    BorsukVerifyReport report;
    if (check(borsuk_cloud_new(4, coords, 8, &cloud), "cloud_new")) return 1;
    if (check(borsuk_partition(cloud, 1.0, &part), "partition")) return 1;
    if (check(borsuk_partition_verify(cloud, part, 1.0, &report), "verify")) return 1;
    printf("parts=%zu ratio=%g valid=%d\n", borsuk_partition_nonempty_parts(part),
           borsuk_partition_ratio(part), (int)report.valid);

    BorsukLinearMap *g = NULL;
    BorsukCertificate cert;
    int8_t vertex[4];
    if (check(borsuk_build_g(4, 1.0, &g), "build_g")) return 1;
    if (check(borsuk_bm_certificate(g, 1.0, &cert, vertex), "bm_certificate")) return 1;
    printf("r=%g dual=%g valid=%d\n", cert.r, cert.dual_margin, (int)cert.valid);

    double x[2] = {3.0, -4.0}, n;
    if (check(borsuk_pnorm(x, 2, INFINITY, &n), "pnorm")) return 1;
    printf("inf-norm=%g\n", n);

    enum BorsukStatus bad = borsuk_bm_lower_bound(4, 0.5, &n);
    printf("bad exponent status=%d message=%s\n", (int)bad, borsuk_last_error());

    borsuk_linear_map_free(g);
    borsuk_partition_free(part);
    borsuk_cloud_free(cloud);
    return 0;
}
