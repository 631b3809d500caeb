// Regenerates the committed fixtures: nml_make_fixtures --out DIR [--seed N]

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "fixtures.hpp"
#include "nml/serialize.hpp"

int main(int argc, char** argv) {
  std::string out_dir;
  std::uint64_t seed = 0;
  CLI::App app("Write NML1/NDS1 test fixtures", "nml_make_fixtures");
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const auto set = nml::fixtures::build_all(seed);
    for (const auto& [name, model] : set.models) nml::write_file(dir / name, nml::save_model(model));
    for (const auto& [name, data] : set.datasets) nml::write_file(dir / name, nml::save_dataset(data));
    std::cout << "wrote " << set.models.size() + set.datasets.size() << " files to " << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
