// Copyright 2026 The t2d Authors
// SPDX-License-Identifier: Apache-2.0
// Placeholder; filled in with the per-criterion suite.
#include <cstdio>
int main(int argc, char** argv) {
  std::printf("criterion runner not yet implemented\n");
  return 1;
}
