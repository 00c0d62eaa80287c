// Release acceptance checks. Each numbered criterion prints one [PASS] or
// [FAIL] line with the measured quantities and its pinned tolerances; the
// process exits nonzero when any requested criterion fails.
//
// Placeholder: criteria are being filled in.
#include <cstdio>

int main(int, char**) {
  std::puts("[FAIL] acceptance criteria not implemented yet");
  return 1;
}
