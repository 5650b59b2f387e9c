#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icsel/bm25.hpp"
#include "icsel/rerank.hpp"
#include "json.hpp"

namespace icsel::cli {

// One line of the selection dump: everything retrieve-rerank decided for a
// single test source, in a stable field order.
struct SelectionRecord {
    std::int64_t test_index = 0;
    std::string source;  // normalized test source text
    std::vector<RetrievalHit> bm25;
    std::vector<SelectedCandidate> selected;
    std::string stopped_by;
    CoverageReport coverage;
};

nlohmann::ordered_json to_json(const SelectionRecord& record);
SelectionRecord selection_record_from_json(const nlohmann::json& j, const std::string& path);

struct TaskRankingRecord {
    int pool_rank = 0;  // 1-based position in the ranking
    std::int64_t id = 0;
    double dev_bleu = 0.0;
};

nlohmann::ordered_json to_json(const TaskRankingRecord& record);
TaskRankingRecord task_ranking_record_from_json(const nlohmann::json& j, const std::string& path);

// One structured record per line, newline-terminated, written atomically in
// record order so identical inputs give identical bytes.
void write_jsonl(const std::string& path, const std::vector<nlohmann::ordered_json>& records);

// Malformed lines raise IntegrityError naming the path and line.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::ordered_json& value);

}  // namespace icsel::cli
