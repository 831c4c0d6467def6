#include <math.h>
#include <stdio.h>
#include <string.h>

#include "phfeat.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            const char *msg = ph_last_error_message();                \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,   \
                    #cond, msg ? msg : "no error");                   \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    /* dark ring around a bright centre: one H1 bar (1, 9) */
    double px[9] = {
        1, 1, 1,
        1, 9, 1,
        1, 1, 1,
    };
    PhImage *img = NULL;
    CHECK(ph_image_new(3, 3, px, &img) == PH_STATUS_OK);
    CHECK(ph_image_width(img) == 3);

    PhBarcode *b0 = NULL, *b1 = NULL;
    CHECK(ph_cubical_persistence(img, &b0, &b1) == PH_STATUS_OK);
    CHECK(ph_barcode_dim(b1) == 1);
    CHECK(ph_barcode_len(b1) == 1);
    PhBar bar;
    CHECK(ph_barcode_get(b1, 0, &bar) == PH_STATUS_OK);
    CHECK(bar.birth == 1.0 && bar.death == 9.0 && !bar.essential);

    const PhBarcode *parts[2] = {b1, b1};
    PhBarcode *agg = NULL;
    CHECK(ph_barcode_aggregate(parts, 2, &agg) == PH_STATUS_OK);
    CHECK(ph_barcode_len(agg) == 2);

    size_t len = 0;
    CHECK(ph_vectorize_len(PH_METHOD_TC, 100, 5, 1, &len) == PH_STATUS_OK);
    CHECK(len == 7);
    double out[7];
    size_t written = 0;
    CHECK(ph_vectorize(agg, PH_METHOD_TC, 100, 5, 1, 0.0, 9.0, out, 7, &written) == PH_STATUS_OK);
    CHECK(written == 7);

    double small[3];
    CHECK(ph_vectorize(agg, PH_METHOD_BC, 100, 5, 1, 0.0, 9.0, small, 3, &written)
          == PH_STATUS_BUFFER_TOO_SMALL);
    CHECK(written == 100);
    CHECK(strstr(ph_last_error_message(), "100") != NULL);

    CHECK(ph_image_new(3, 3, NULL, &img) == PH_STATUS_NULL_POINTER);

    ph_barcode_free(agg);
    ph_barcode_free(b0);
    ph_barcode_free(b1);
    ph_image_free(img);
    printf("ok %s\n", ph_version());
    return 0;
}
