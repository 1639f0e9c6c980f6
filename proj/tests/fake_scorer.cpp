// Line-protocol scorer used by the tests.
//   fake_scorer [--crash-after N] [--no-vocab] [--silent] [--garbage]
// Scores are the candidate lengths; candidates starting with "qq" get a per-request error
// and are reported missing from the vocabulary.
#include <cstdlib>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

int main(int argc, char** argv) {
  long crash_after = -1;
  bool vocab = true;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--crash-after" && i + 1 < argc) crash_after = std::atol(argv[++i]);
    if (a == "--no-vocab") vocab = false;
    if (a == "--silent") return 0;
    if (a == "--garbage") {
      std::cout << "hello\n" << std::flush;
      return 0;
    }
  }
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    const auto j = nlohmann::json::parse(line);
    nlohmann::json out = nlohmann::json::object();
    if (j.contains("op")) {
      if (vocab) out["vocab_hash"] = "fake-1";
      if (j.contains("words")) {
        out["contains"] = nlohmann::json::object();
        for (const auto& w : j["words"]) out["contains"][w.get<std::string>()] = !w.get<std::string>().starts_with("qq");
      }
    } else {
      if (crash_after >= 0 && served++ >= crash_after) return 3;
      out["id"] = j["id"];
      const auto c0 = j["candidates"][0].get<std::string>();
      const auto c1 = j["candidates"][1].get<std::string>();
      if (c0.starts_with("qq") || c1.starts_with("qq"))
        out["error"] = "candidate not a single token";
      else
        out["scores"] = {static_cast<double>(c0.size()), static_cast<double>(c1.size())};
    }
    std::cout << out.dump() << '\n' << std::flush;
  }
}
