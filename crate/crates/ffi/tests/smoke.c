#include <math.h>
#include <stdio.h>
#include <string.h>

#include "wienerlab.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed: %s\n", #cond);        \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    WlPoly *p = NULL;
    WlPoly *q = NULL;
    WlPoly *pq = NULL;
    WlClark *c = NULL;
    double v = 0.0;
    char *text = NULL;

    CHECK(wienerlab_poly_parse("x1*x2 + 3", 2, 8, &p) == WL_STATUS_OK);
    CHECK(wienerlab_poly_expectation(p, &v) == WL_STATUS_OK && v == 3.0);

    CHECK(wienerlab_poly_parse("x1", 2, 8, &q) == WL_STATUS_OK);
    CHECK(wienerlab_poly_product(q, q, &pq) == WL_STATUS_OK);
    CHECK(wienerlab_poly_expectation(pq, &v) == WL_STATUS_OK && v == 1.0);

    double sample[2] = {2.0, -1.0};
    CHECK(wienerlab_poly_evaluate(p, sample, 2, &v) == WL_STATUS_OK && v == 1.0);

    CHECK(wienerlab_clark_reconstruct(p, &c) == WL_STATUS_OK);
    CHECK(wienerlab_clark_residual(c, &v) == WL_STATUS_OK && v == 0.0);
    CHECK(wienerlab_clark_to_json(c, &text) == WL_STATUS_OK && strstr(text, "residual_l2") != NULL);
    wienerlab_string_free(text);

    CHECK(wienerlab_poly_parse("x1*(", 2, 8, &pq) == WL_STATUS_PARSE);
    CHECK(strstr(wienerlab_last_error_message(), "1:4") != NULL);

    wienerlab_clark_free(c);
    wienerlab_poly_free(pq);
    wienerlab_poly_free(q);
    wienerlab_poly_free(p);
    puts("ok");
    return 0;
}
