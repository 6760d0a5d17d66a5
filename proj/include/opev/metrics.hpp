#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "opev/errors.hpp"

namespace opev::metrics {

/// Line-delimited JSON log. Deliberately carries no wall-clock fields:
/// identical runs must produce byte-identical logs.
class JsonlLogger {
public:
    JsonlLogger() = default;
    explicit JsonlLogger(const std::string& path) { open(path); }

    void open(const std::string& path) {
        out_.open(path);
        if (!out_) throw IoError("JsonlLogger: cannot open " + path);
    }

    bool is_open() const { return out_.is_open(); }

    void log(const nlohmann::json& record) {
        if (out_.is_open()) out_ << record.dump() << '\n';
    }

    void flush() {
        if (out_.is_open()) out_.flush();
    }

private:
    std::ofstream out_;
};

}  // namespace opev::metrics
