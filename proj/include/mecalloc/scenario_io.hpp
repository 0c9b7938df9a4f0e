#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mecalloc/scenario.hpp"

namespace mecalloc {

inline constexpr int kInstanceFormatVersion = 1;

// Contents of an instance file. Either part may be absent on disk.
struct InstanceFile {
  std::optional<Scenario> scenario;
  std::optional<std::vector<ServiceRequest>> requests;
};

// JSON text with top-level fields `version`, `scenario`, `requests`.
std::string dump_instance(const Scenario* s, const std::vector<ServiceRequest>* requests);

// Parses and validates. Requests are validated against the embedded scenario,
// or against `context` when the text carries requests only. Throws ParseError
// naming the offending field.
InstanceFile parse_instance(const std::string& text, const Scenario* context = nullptr);

void write_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario read_scenario(const std::filesystem::path& path);

void write_instance(const std::filesystem::path& path, const Scenario* s,
                    const std::vector<ServiceRequest>* requests);
InstanceFile read_instance(const std::filesystem::path& path, const Scenario* context = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mecalloc
