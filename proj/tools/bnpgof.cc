// Apache License, Version 2.0, refer to LICENSE.txt

#include <iostream>

#include "bnpgof/cli.hh"

int main(int argc, char** argv) {
  return bnpgof::main_entry(argc, argv, std::cout, std::cerr);
}
