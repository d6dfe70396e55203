// Converts a VOC-layout directory into a manifest plus per-instance
// candidate masks.
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fbg/dataset.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Import a VOC-layout segmentation tree", "fbg_import_voc"};
  std::string voc_root;
  std::string out_dir;
  app.add_option("voc_root", voc_root, "Directory holding JPEGImages etc.")
      ->required();
  app.add_option("out_dir", out_dir, "Where manifest.json is written")
      ->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    const auto m = fbg::import_voc(voc_root, out_dir);
    std::cout << "imported " << m.images.size() << " images\n";
  } catch (const std::exception& e) {
    std::cerr << "fbg_import_voc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
