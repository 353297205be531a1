#include <stdio.h>
#include <string.h>

#include "gbs.h"

#define CHECK(call)                                                   \
  do {                                                                \
    GbsStatus s_ = (call);                                            \
    if (s_ != GBS_STATUS_OK) {                                        \
      char msg_[256];                                                 \
      gbs_last_error_message(msg_, sizeof msg_);                      \
      fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_, msg_);  \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  GbsSpace *space = NULL;
  CHECK(gbs_space_thresholds(64, &space));

  size_t n = 0, m = 0, k = 0, queries = 0, outcome = 0;
  double c_star = 1.0;
  CHECK(gbs_space_dims(space, &n, &m));
  CHECK(gbs_coherence(space, 1e-9, &c_star, NULL, NULL));
  CHECK(gbs_minimal_k(space, &k));
  CHECK(gbs_run_gbs(space, 40, 7, 0, &queries, &outcome));
  printf("%zu %zu %zu %zu %zu %d\n", n, m, k, queries, outcome, c_star < 1e-9);

  int8_t bad[4] = {1, -1, 1, -1};
  GbsSpace *dup = NULL;
  if (gbs_space_from_matrix(bad, 2, 2, &dup) != GBS_STATUS_INVALID_ARGUMENT || dup != NULL) return 2;
  char msg[16];
  size_t len = gbs_last_error_message(msg, sizeof msg);
  if (len <= strlen(msg)) return 3;

  gbs_space_free(space);
  return 0;
}
