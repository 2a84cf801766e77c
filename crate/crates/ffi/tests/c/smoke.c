#include <stdio.h>
#include <stdlib.h>
#include "phosphene.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        return 64;
    }
    PhDataset *ds = NULL;
    if (ph_dataset_load(argv[1], &ds) != PH_STATUS_OK) {
        fprintf(stderr, "load: %s\n", ph_last_error_message());
        return 1;
    }
    size_t n = 0;
    ph_dataset_trial_count(ds, &n);

    PhFit *fit = NULL;
    if (ph_fit_descriptive(ds, 0, PH_MODEL_SPECTRAL, 2, 0, 0, &fit) != PH_STATUS_OK) {
        fprintf(stderr, "fit: %s\n", ph_last_error_message());
        return 1;
    }
    double objective = -1.0;
    ph_fit_objective(fit, &objective);

    double pred[80];
    PhStatus st = ph_fit_predict(fit, 5.0, 10.0, 0.25, 80, pred);
    double r = 0.0;
    PhStatus deg = ph_pearson_r(pred, pred, 1, &r);

    printf("trials=%zu objective=%.6f predict=%d short=%d\n", n, objective, (int)st, (int)deg);
    ph_fit_free(fit);
    ph_dataset_free(ds);
    return 0;
}
