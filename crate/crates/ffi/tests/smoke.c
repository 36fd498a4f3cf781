#include <stdio.h>
#include "epiobs.h"

#define CHECK(call)                                                      \
    do {                                                                 \
        EpiStatus st_ = (call);                                          \
        if (st_ != EPI_STATUS_OK) {                                      \
            const char *msg = epi_last_error();                          \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_,           \
                    msg ? msg : "(none)");                               \
            return 1;                                                    \
        }                                                                \
    } while (0)

int main(void) {
    EpiModel *input = NULL, *protocol = NULL, *task = NULL;
    EpiAction *is = NULL, *sa = NULL;
    CHECK(epi_input_model(2, 2, &input));
    CHECK(epi_gen_is(1, input, &is));
    CHECK(epi_gen_sa(1, input, &sa));
    CHECK(epi_product_update(input, is, &protocol));
    CHECK(epi_product_update(input, sa, &task));

    bool exists = false;
    char *verdict = NULL;
    CHECK(epi_decide_obstruction(protocol, task, EPI_MODE_K, &exists, &verdict));
    printf("facets=%zu exists=%d\n", epi_model_facet_count(protocol), (int)exists);
    epi_string_free(verdict);

    EpiModel *bad = NULL;
    if (epi_model_from_json("[", &bad) != EPI_STATUS_PARSE || epi_last_error() == NULL)
        return 2;

    epi_action_free(is);
    epi_action_free(sa);
    epi_model_free(input);
    epi_model_free(protocol);
    epi_model_free(task);
    return exists ? 0 : 3;
}
