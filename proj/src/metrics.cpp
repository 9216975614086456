#include "amto/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amto/errors.hpp"

namespace amto {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

const std::string& metrics_csv_header() {
    static const std::string header =
        "run_id,seed,task_id,checkpoint,global_iteration,train_loss,master_val_loss,"
        "slave_val_loss,val_accuracy,lr,transfer_source,transfer_accepted";
    return header;
}

std::string format_metrics_row(const MetricsRow& r) {
    std::ostringstream os;
    os << r.run_id << ',' << r.seed << ',' << r.task_id << ',' << r.checkpoint << ','
       << r.global_iteration << ',' << format_double(r.train_loss) << ','
       << format_double(r.master_val_loss) << ',' << format_double(r.slave_val_loss)
       << ',' << format_double(r.val_accuracy) << ',' << format_double(r.lr) << ','
       << r.transfer_source << ',' << r.transfer_accepted;
    return os.str();
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open " + path + " for writing");
    os << metrics_csv_header() << '\n';
    for (const auto& r : rows) os << format_metrics_row(r) << '\n';
}

namespace {

const char* kColumns[] = {"run_id",          "seed",          "task_id",
                          "checkpoint",      "global_iteration", "train_loss",
                          "master_val_loss", "slave_val_loss", "val_accuracy",
                          "lr",              "transfer_source", "transfer_accepted"};
constexpr std::size_t kColumnCount = sizeof(kColumns) / sizeof(kColumns[0]);

double parse_field_double(const std::string& cell, const char* column) {
    if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw data_error(std::string("metrics column '") + column + "': bad value '" +
                         cell + "'");
    return v;
}

long long parse_field_int(const std::string& cell, const char* column) {
    long long v;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw data_error(std::string("metrics column '") + column + "': bad value '" +
                         cell + "'");
    return v;
}

std::uint64_t parse_field_u64(const std::string& cell, const char* column) {
    std::uint64_t v;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw data_error(std::string("metrics column '") + column + "': bad value '" +
                         cell + "'");
    return v;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw data_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != metrics_csv_header())
        throw data_error(path + ": unexpected metrics header '" + line + "'");

    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != kColumnCount)
            throw data_error(path + ": expected " + std::to_string(kColumnCount) +
                             " columns, got " + std::to_string(cells.size()));
        MetricsRow r;
        r.run_id = cells[0];
        r.seed = parse_field_u64(cells[1], kColumns[1]);
        r.task_id = static_cast<int>(parse_field_int(cells[2], kColumns[2]));
        r.checkpoint = static_cast<int>(parse_field_int(cells[3], kColumns[3]));
        r.global_iteration = parse_field_int(cells[4], kColumns[4]);
        r.train_loss = parse_field_double(cells[5], kColumns[5]);
        r.master_val_loss = parse_field_double(cells[6], kColumns[6]);
        r.slave_val_loss = parse_field_double(cells[7], kColumns[7]);
        r.val_accuracy = parse_field_double(cells[8], kColumns[8]);
        r.lr = parse_field_double(cells[9], kColumns[9]);
        r.transfer_source = static_cast<int>(parse_field_int(cells[10], kColumns[10]));
        r.transfer_accepted = static_cast<int>(parse_field_int(cells[11], kColumns[11]));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw data_error(path + ": no data rows");
    return rows;
}

void write_events_jsonl(const std::string& path, const std::vector<TransferEvent>& events) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open " + path + " for writing");
    for (const auto& ev : events) {
        nlohmann::ordered_json j;
        j["checkpoint"] = ev.checkpoint;
        j["receiver"] = ev.receiver;
        j["source"] = ev.source;
        j["master_val_loss"] = ev.master_val_loss;
        j["slave_val_loss"] = ev.slave_val_loss;
        j["accepted"] = ev.accepted;
        j["rl_increment"] = ev.rl_increment;
        os << j.dump() << '\n';
    }
}

}  // namespace amto
