#include "kaclab/cli.hpp"

int main(int argc, char** argv)
{
  return kaclab::cli::run(argc, argv);
}
