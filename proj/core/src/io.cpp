#include "fraccaloric/io.hpp"

#include <cstdio>
#include <cstring>

#include "fraccaloric/errors.hpp"

namespace fc {

struct CsvWriter::Impl {
    FILE* f = nullptr;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
    impl_->f = std::fopen(path.c_str(), "wb");
    if (!impl_->f) throw Error("cannot open " + path + " for writing");
    for (size_t i = 0; i < header.size(); ++i)
        std::fprintf(impl_->f, "%s%s", header[i].c_str(), i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
    if (impl_->f) std::fclose(impl_->f);
    delete impl_;
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i)
        std::fprintf(impl_->f, "%.17g%s", values[i], i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_prefixed(const std::string& label, const std::vector<double>& values) {
    std::fprintf(impl_->f, "%s%s", label.c_str(), values.empty() ? "\n" : ",");
    row(values);
}

void write_field_csv(const std::string& path, const ScalarField& f) {
    CsvWriter w(path, {"x", "y", "value", "stderr"});
    for (size_t i = 0; i < f.pts.size(); ++i)
        w.row({f.pts[i][0], f.pts[i][1], f.value[i], f.stderr_[i]});
}

void write_columns(const std::string& path,
                   const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "FCCOL1\n");
    std::uint64_t n = cols.size();
    std::fwrite(&n, sizeof(n), 1, f);
    for (const auto& [name, data] : cols) {
        std::fprintf(f, "%s\n", name.c_str());
        std::uint64_t len = data.size();
        std::fwrite(&len, sizeof(len), 1, f);
        if (len) std::fwrite(data.data(), sizeof(double), len, f);
    }
    std::fclose(f);
}

std::vector<std::pair<std::string, std::vector<double>>> read_columns(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw Error("cannot open " + path);
    char magic[8] = {0};
    if (!std::fgets(magic, 8, f) || std::strcmp(magic, "FCCOL1\n") != 0) {
        std::fclose(f);
        throw Error("bad column file magic in " + path);
    }
    std::uint64_t n = 0;
    if (std::fread(&n, sizeof(n), 1, f) != 1) {
        std::fclose(f);
        throw Error("truncated column file " + path);
    }
    std::vector<std::pair<std::string, std::vector<double>>> out;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string name;
        int c;
        while ((c = std::fgetc(f)) != EOF && c != '\n') name.push_back(static_cast<char>(c));
        std::uint64_t len = 0;
        if (std::fread(&len, sizeof(len), 1, f) != 1) {
            std::fclose(f);
            throw Error("truncated column file " + path);
        }
        std::vector<double> data(len);
        if (len && std::fread(data.data(), sizeof(double), len, f) != len) {
            std::fclose(f);
            throw Error("truncated column payload in " + path);
        }
        out.emplace_back(std::move(name), std::move(data));
    }
    std::fclose(f);
    return out;
}

}  // namespace fc
