//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "cli.h"

int main(int argc, char **argv) {
  return mollm::cli::run(argc, argv);
}
