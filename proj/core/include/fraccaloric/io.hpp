#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraccaloric/grid.hpp"

namespace fc {

// CSV with a header row; reals printed with %.17g so reruns are byte-identical.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void row_prefixed(const std::string& label, const std::vector<double>& values);

  private:
    struct Impl;
    Impl* impl_;
};

void write_field_csv(const std::string& path, const ScalarField& f);

// Little-endian 64-bit binary columns with a short self-describing header:
// magic "FCCOL1\n", column count, then per column a name line, a u64 length,
// and the payload doubles.
void write_columns(const std::string& path,
                   const std::vector<std::pair<std::string, std::vector<double>>>& cols);
std::vector<std::pair<std::string, std::vector<double>>> read_columns(const std::string& path);

}  // namespace fc
