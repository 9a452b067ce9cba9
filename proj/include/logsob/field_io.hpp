// "logsob-field-v1" field file format: JSON wrapper around base64 raw f64le.
#pragma once

#include <string>

#include "logsob/grid.hpp"

namespace logsob {

std::string field_to_json(const Field& u);
Field field_from_json(const std::string& text);

void write_field(const Field& u, const std::string& path);
Field read_field(const std::string& path);

}  // namespace logsob
