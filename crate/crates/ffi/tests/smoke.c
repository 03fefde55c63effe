#include <stdio.h>
#include "mtail.h"

int main(void) {
    MtailModel *m = NULL;
    MtailTailEstimate t;
    MtailParams *p = NULL;
    MtailEnvelope e;

    if (mtail_model_rademacher(4, &m) != MTAIL_STATUS_OK) return 1;
    if (mtail_estimate_tail(m, 0.9, 1000, 1, 1, false, &t) != MTAIL_STATUS_OK) return 2;
    if (t.method != MTAIL_METHOD_EXHAUSTIVE || t.p_hat != 0.3125) return 3;
    if (mtail_model_params(m, &p) != MTAIL_STATUS_OK) return 4;
    if (mtail_tail_bound_sq(0.0, p, &e) != MTAIL_STATUS_OK || e.value != 1.0) return 5;
    mtail_params_free(p);
    mtail_model_free(m);

    if (mtail_params_new(0.9, 0.0, &p) != MTAIL_STATUS_INVALID_PARAMS) return 6;
    printf("%s\n", mtail_last_error_message());
    return 0;
}
