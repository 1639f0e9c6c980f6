#pragma once

#include <CLI11.hpp>

namespace sva::cli {

/// CLI11 config reader for JSON files. Top-level keys set global options; an object
/// value named after a subcommand sets that subcommand's options:
///   {"seed": 7, "generate": {"n": 200, "template": ["A", "C"]}}
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace sva::cli
