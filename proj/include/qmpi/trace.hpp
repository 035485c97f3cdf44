#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qmpi {

// One committed engine/fabric operation. Rendered one per line as
//   <seq> <rank> <kind> key="value" key="value" ...
// with seq strictly increasing in commit order. Detail values are always
// quoted; keys and kinds are plain identifiers.
struct TraceRecord {
    std::uint64_t seq;
    int rank;
    std::string kind;
    std::vector<std::pair<std::string, std::string>> details;
};

std::string format_line(const TraceRecord& rec);

class TraceLog {
  public:
    // Caller must hold the run's scheduler lock; seq numbers follow call order.
    const TraceRecord& emit(int rank, std::string kind,
                            std::vector<std::pair<std::string, std::string>> details);

    const std::vector<TraceRecord>& records() const { return records_; }

    // Serializes all records to a file, one line each. Throws on IO failure.
    void write_file(const std::string& path) const;

    std::string render() const;

  private:
    std::vector<TraceRecord> records_;
    std::uint64_t next_seq_ = 1;
};

}  // namespace qmpi
