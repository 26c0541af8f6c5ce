// SPDX-License-Identifier: Apache-2.0

#include "oproot/cli/commands.hpp"

int main(int argc, char **argv)
{
  return oproot::cli::run_cli(argc, argv);
}
