#include <stdio.h>
#include <string.h>
#include "gsdist.h"

#define CHECK(call)                                                   \
    do {                                                              \
        GsdStatus st = (call);                                        \
        if (st != GSD_OK) {                                           \
            fprintf(stderr, "%s: %d %s\n", #call, st, gsd_last_error()); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    GsdGraph *g = NULL;
    GsdSystem *sys = NULL;
    GsdSchedule *s = NULL;
    GsdResources r;
    GsdFidelity f;
    char *text = NULL;

    CHECK(gsd_graph_load("wheel:5", &g));
    CHECK(gsd_solve(g, "exact", &sys));
    CHECK(gsd_system_to_text(sys, &text));
    printf("%s", text);
    gsd_string_free(text);
    CHECK(gsd_schedule_build(g, "sc", 0, &s));
    CHECK(gsd_schedule_resources(s, &r));
    CHECK(gsd_schedule_fidelity(s, 0.001, 0.0, true, 500, 1, &f));
    printf("d=%zu bell=%zu rounds=%zu fidelity=%.4f\n", gsd_system_len(sys), r.bell_pairs, r.rounds, f.mean);

    if (gsd_graph_load("nosuch:3", &g) != GSD_ERR_INVALID || gsd_last_error() == NULL) {
        return 2;
    }
    gsd_schedule_free(s);
    gsd_system_free(sys);
    gsd_graph_free(g);
    return 0;
}
