// Writes the networks built in code as JSON documents under a directory.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "forensic/bayesnet.hpp"
#include "forensic/oobn.hpp"
#include "forensic/trace.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: export_fixtures <dir>\n";
    return 1;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const forensic::bn::Network& net) {
    std::ofstream(dir / name) << forensic::bn::to_json(net) << "\n";
  };
  write("fictional_crime.json", forensic::oobn::fictional_crime_network());
  write("dna_testing_error.json", forensic::oobn::dna_testing_error_network({0.5, 0.01, 0.001, 0.001}));
  write("transfer.json", forensic::build_transfer_network(forensic::default_transfer_params()));
  return 0;
}
