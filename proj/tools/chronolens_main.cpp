#include "chronolens/cli.hpp"

int main(int argc, char** argv) {
  return chronolens::cli_main({argv + 1, argv + argc});
}
