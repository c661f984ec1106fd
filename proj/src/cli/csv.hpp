#pragma once

#include <string>
#include <vector>

namespace dirac::cli {

/// %.17g, so files compare byte for byte across runs.
std::string format_number(double v);

/// Throws IoError when the file cannot be written.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& text);

}  // namespace dirac::cli
