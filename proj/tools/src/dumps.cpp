#include "cli/dumps.hpp"

#include <fstream>

#include "icsel/errors.hpp"

namespace icsel::cli {

nlohmann::ordered_json to_json(const SelectionRecord& record) {
    nlohmann::ordered_json j;
    j["test_index"] = record.test_index;
    j["source"] = record.source;
    auto& bm25 = j["bm25"] = nlohmann::ordered_json::array();
    for (const auto& hit : record.bm25) {
        bm25.push_back({{"id", hit.id}, {"score", hit.score}, {"rank", hit.rank}});
    }
    auto& selected = j["selected"] = nlohmann::ordered_json::array();
    for (const auto& s : record.selected) {
        selected.push_back({{"id", s.id},
                            {"score", s.score},
                            {"iteration", s.iteration},
                            {"bm25_rank", s.rank}});
    }
    j["stopped_by"] = record.stopped_by;
    j["coverage"] = {{"orders", record.coverage.orders},
                     {"covered_fraction", record.coverage.covered_fraction}};
    return j;
}

SelectionRecord selection_record_from_json(const nlohmann::json& j, const std::string& path) {
    try {
        SelectionRecord record;
        record.test_index = j.at("test_index").get<std::int64_t>();
        record.source = j.at("source").get<std::string>();
        for (const auto& hit : j.at("bm25")) {
            record.bm25.push_back(RetrievalHit{hit.at("id").get<std::int64_t>(),
                                               hit.at("score").get<double>(),
                                               hit.at("rank").get<int>()});
        }
        for (const auto& s : j.at("selected")) {
            record.selected.push_back(SelectedCandidate{
                s.at("id").get<std::int64_t>(), s.at("bm25_rank").get<int>(),
                s.at("score").get<double>(), s.at("iteration").get<int>()});
        }
        record.stopped_by = j.at("stopped_by").get<std::string>();
        const auto& cov = j.at("coverage");
        record.coverage.orders = cov.at("orders").get<std::vector<int>>();
        record.coverage.covered_fraction = cov.at("covered_fraction").get<std::vector<double>>();
        return record;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError("bad selection record in " + path + ": " + e.what());
    }
}

nlohmann::ordered_json to_json(const TaskRankingRecord& record) {
    return {{"pool_rank", record.pool_rank}, {"id", record.id}, {"dev_bleu", record.dev_bleu}};
}

TaskRankingRecord task_ranking_record_from_json(const nlohmann::json& j, const std::string& path) {
    try {
        return TaskRankingRecord{j.at("pool_rank").get<int>(), j.at("id").get<std::int64_t>(),
                                 j.at("dev_bleu").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError("bad ranking record in " + path + ": " + e.what());
    }
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::ordered_json>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    for (const auto& record : records) {
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failure on output file: " + path);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<nlohmann::json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw IntegrityError(path + ":" + std::to_string(lineno) +
                                 ": malformed record: " + e.what());
        }
    }
    if (in.bad()) throw IoError("read failure on file: " + path);
    return records;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& value) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + path);
    out << value.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write failure on output file: " + path);
}

}  // namespace icsel::cli
