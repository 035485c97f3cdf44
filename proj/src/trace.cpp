#include "qmpi/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmpi {

std::string format_line(const TraceRecord& rec) {
    std::ostringstream out;
    out << rec.seq << ' ' << rec.rank << ' ' << rec.kind;
    for (const auto& [key, value] : rec.details) {
        out << ' ' << key << "=\"" << value << '"';
    }
    return out.str();
}

const TraceRecord& TraceLog::emit(int rank, std::string kind,
                                  std::vector<std::pair<std::string, std::string>> details) {
    records_.push_back(TraceRecord{next_seq_++, rank, std::move(kind), std::move(details)});
    return records_.back();
}

std::string TraceLog::render() const {
    std::string out;
    for (const auto& rec : records_) {
        out += format_line(rec);
        out += '\n';
    }
    return out;
}

void TraceLog::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open trace file: " + path);
    }
    f << render();
}

}  // namespace qmpi
