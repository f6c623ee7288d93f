/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "slts/slts.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    slts_last_error());                                \
            ++failures;                                                \
        }                                                              \
    } while (0)

int main(void) {
    const double pi = 3.14159265358979323846;
    double seg[2] = {0.0, pi};
    double zero[1] = {0.0};
    slts_model* m = NULL;
    double re = 0, im = 0;

    EXPECT(slts_model_create(seg, 1, zero, NULL, 1, &m) == SLTS_OK);
    EXPECT(slts_char_delta(m, 4.0, 0.0, 0, &re, &im) == SLTS_OK);
    EXPECT(fabs(re) < 1e-12 && fabs(im) < 1e-12);
    EXPECT(slts_char_delta(m, -1.0, 0.0, 1, &re, &im) == SLTS_OK);
    EXPECT(fabs(re - cosh(pi)) < 1e-10 * cosh(pi));
    EXPECT(slts_char_delta(m, 1.0, 0.0, 2, &re, &im) == SLTS_ERR_INPUT);
    EXPECT(strlen(slts_last_error()) > 0);
    EXPECT(slts_weyl(m, 0.25, 0.0, &re, &im) == SLTS_ERR_NUMERIC);
    EXPECT(slts_weyl(m, -1.0, 0.0, &re, &im) == SLTS_OK);
    EXPECT(fabs(re + tanh(pi)) < 1e-12);
    slts_model_free(m);

    double bad[4] = {0.0, 2.0, 1.0, 3.0};
    m = NULL;
    EXPECT(slts_model_create(bad, 2, zero, NULL, 1, &m) == SLTS_ERR_INPUT);
    EXPECT(m == NULL);
    slts_model_free(NULL);

    slts_problem* p = NULL;
    EXPECT(slts_problem_parse("schema_version: 1\ntimescale: [[0, 1]]\nbogus: 1\n", NULL, &p) == SLTS_ERR_INPUT);
    EXPECT(strstr(slts_last_error(), "bogus") != NULL);
    EXPECT(slts_problem_default(&p) == SLTS_OK);
    EXPECT(slts_problem_set_tol(p, -1.0) == SLTS_ERR_INPUT);
    EXPECT(slts_problem_set_tol(p, 1e-12) == SLTS_OK);
    EXPECT(slts_problem_set_threads(p, 2) == SLTS_OK);
    char* yaml = NULL;
    EXPECT(slts_problem_config(p, &yaml) == SLTS_OK);
    EXPECT(yaml != NULL && strstr(yaml, "rtol: 1e-12") != NULL);
    slts_string_free(yaml);

    char* table = NULL;
    int failed = -1;
    slts_problem* q = NULL;
    EXPECT(slts_problem_parse("schema_version: 1\ntimescale: [[0, 1]]\nverify: {criteria: [3]}\n", NULL, &q) ==
           SLTS_OK);
    EXPECT(slts_run_verify(q, &table, &failed) == SLTS_OK);
    EXPECT(failed == 0);
    EXPECT(table != NULL && strncmp(table, "PASS", 4) == 0);
    slts_string_free(table);
    slts_problem_free(q);
    slts_problem_free(p);
    slts_problem_free(NULL);

    if (failures) fprintf(stderr, "%d failures\n", failures);
    return failures ? 1 : 0;
}
