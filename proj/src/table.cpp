#include "table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace hycard {

const char* column_kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::NumericContinuous: return "numeric-continuous";
        case ColumnKind::NumericOrdinal: return "numeric-ordinal";
        case ColumnKind::CategoricalNominal: return "categorical-nominal";
        case ColumnKind::Binary: return "binary";
        case ColumnKind::Target: return "target";
    }
    return "?";
}

size_t DatasetDescriptor::attribute_count() const {
    size_t n = 0;
    for (const auto& c : columns)
        if (!c.is_id) ++n;
    return n;
}

size_t DatasetDescriptor::target_index() const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i].kind == ColumnKind::Target) return i;
    throw DataError("descriptor '" + name + "' has no target column");
}

int DatasetDescriptor::column_index(const std::string& col) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == col) return static_cast<int>(i);
    return -1;
}

void DatasetDescriptor::validate() const {
    std::unordered_set<std::string> seen;
    size_t targets = 0;
    for (const auto& c : columns) {
        if (!seen.insert(c.name).second)
            throw DataError("descriptor '" + name + "': duplicate column '" + c.name + "'");
        if (c.kind == ColumnKind::Target) ++targets;
    }
    if (targets != 1)
        throw DataError("descriptor '" + name + "': expected exactly one target column");
}

DatasetDescriptor builtin_descriptor(Dataset which) {
    DatasetDescriptor d;
    using K = ColumnKind;
    if (which == Dataset::Dataset1) {
        d.name = "dataset1";
        d.columns = {
            {"id", K::NumericContinuous, true},
            {"age", K::NumericContinuous, false},  // days in the raw file
            {"gender", K::CategoricalNominal, false},
            {"height", K::NumericContinuous, false},
            {"weight", K::NumericContinuous, false},
            {"ap_hi", K::NumericContinuous, false},
            {"ap_lo", K::NumericContinuous, false},
            {"cholesterol", K::NumericOrdinal, false},
            {"gluc", K::NumericOrdinal, false},
            {"smoke", K::Binary, false},
            {"alco", K::Binary, false},
            {"active", K::Binary, false},
            {"cardio", K::Target, false},
        };
    } else {
        d.name = "dataset2";
        d.columns = {
            {"Age", K::NumericContinuous, false},
            {"Sex", K::CategoricalNominal, false},
            {"ChestPainType", K::CategoricalNominal, false},
            {"RestingBP", K::NumericContinuous, false},
            {"Cholesterol", K::NumericContinuous, false},
            {"FastingBS", K::Binary, false},
            {"RestingECG", K::CategoricalNominal, false},
            {"MaxHR", K::NumericContinuous, false},
            {"ExerciseAngina", K::CategoricalNominal, false},
            {"Oldpeak", K::NumericContinuous, false},
            {"ST_Slope", K::CategoricalNominal, false},
            {"HeartDisease", K::Target, false},
        };
    }
    d.validate();
    return d;
}

DatasetDescriptor descriptor_by_name(const std::string& name) {
    if (name == "dataset1") return builtin_descriptor(Dataset::Dataset1);
    if (name == "dataset2") return builtin_descriptor(Dataset::Dataset2);
    throw ConfigError("unknown dataset schema '" + name + "' (expected dataset1 or dataset2)");
}

bool Cell::operator==(const Cell& o) const {
    if (tag != o.tag) return false;
    switch (tag) {
        case Tag::Number: return num == o.num;
        case Tag::Category: return cat == o.cat;
        case Tag::Missing: return true;
    }
    return false;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA" || s == "?"; }

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

Cell parse_cell(const std::string& raw, const ColumnSpec& col, size_t data_row,
                const std::string& origin) {
    std::string s = trim(raw);
    if (is_missing_token(s)) return Cell::missing();
    auto fail = [&](const std::string& what) -> Cell {
        std::ostringstream os;
        os << origin << ": row " << data_row << ", column '" << col.name << "': " << what << " '"
           << s << "'";
        throw DataError(os.str());
    };
    switch (col.kind) {
        case ColumnKind::CategoricalNominal:
            return Cell::category(s);
        case ColumnKind::Binary:
        case ColumnKind::Target: {
            double v;
            if (!parse_double(s, v) || (v != 0.0 && v != 1.0))
                return fail(col.kind == ColumnKind::Target ? "target value must be 0 or 1, got"
                                                           : "binary value must be 0 or 1, got");
            return Cell::number(v);
        }
        case ColumnKind::NumericContinuous:
        case ColumnKind::NumericOrdinal: {
            double v;
            if (!parse_double(s, v)) return fail("cannot parse as number");
            return Cell::number(v);
        }
    }
    return Cell::missing();
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

RawTable parse_csv_text(const std::string& text, const std::string& origin,
                        const DatasetDescriptor& descriptor) {
    descriptor.validate();
    CsvDoc doc = csv_parse(text, origin);

    if (doc.header.size() != descriptor.columns.size()) {
        std::ostringstream os;
        os << origin << ": expected " << descriptor.columns.size() << " columns for schema '"
           << descriptor.name << "', found " << doc.header.size();
        throw DataError(os.str());
    }
    for (size_t i = 0; i < doc.header.size(); ++i) {
        if (trim(doc.header[i]) != descriptor.columns[i].name) {
            std::ostringstream os;
            os << origin << ": column " << i + 1 << " is '" << trim(doc.header[i]) << "', expected '"
               << descriptor.columns[i].name << "'";
            throw DataError(os.str());
        }
    }

    RawTable table;
    table.descriptor = descriptor;
    table.rows.reserve(doc.rows.size());
    for (size_t r = 0; r < doc.rows.size(); ++r) {
        std::vector<Cell> row;
        row.reserve(descriptor.columns.size());
        for (size_t c = 0; c < descriptor.columns.size(); ++c)
            row.push_back(parse_cell(doc.rows[r][c], descriptor.columns[c], r + 1, origin));
        table.rows.push_back(std::move(row));
    }
    return table;
}

RawTable load_csv(const std::string& path, const DatasetDescriptor& descriptor) {
    descriptor.validate();
    CsvDoc doc = csv_read_file(path);
    // Re-serialize through the shared text path to keep a single code path.
    // Cheaper: parse cells directly from doc.
    RawTable table;
    table.descriptor = descriptor;
    if (doc.header.size() != descriptor.columns.size()) {
        std::ostringstream os;
        os << path << ": expected " << descriptor.columns.size() << " columns for schema '"
           << descriptor.name << "', found " << doc.header.size();
        throw DataError(os.str());
    }
    for (size_t i = 0; i < doc.header.size(); ++i) {
        if (trim(doc.header[i]) != descriptor.columns[i].name) {
            std::ostringstream os;
            os << path << ": column " << i + 1 << " is '" << trim(doc.header[i]) << "', expected '"
               << descriptor.columns[i].name << "'";
            throw DataError(os.str());
        }
    }
    table.rows.reserve(doc.rows.size());
    for (size_t r = 0; r < doc.rows.size(); ++r) {
        std::vector<Cell> row;
        row.reserve(descriptor.columns.size());
        for (size_t c = 0; c < descriptor.columns.size(); ++c)
            row.push_back(parse_cell(doc.rows[r][c], descriptor.columns[c], r + 1, path));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string table_to_csv_text(const RawTable& table) {
    std::ostringstream out;
    for (size_t i = 0; i < table.descriptor.columns.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(table.descriptor.columns[i].name);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            const Cell& cell = row[i];
            switch (cell.tag) {
                case Cell::Tag::Number: out << format_number(cell.num); break;
                case Cell::Tag::Category: out << csv_escape(cell.cat); break;
                case Cell::Tag::Missing: break;
            }
        }
        out << '\n';
    }
    return out.str();
}

void write_csv(const RawTable& table, const std::string& path) {
    std::string text = table_to_csv_text(table);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

namespace {

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double round_to(double v, double step) { return std::round(v / step) * step; }

// Weighted category pick; weights need not be normalized.
template <size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& cats,
                 const std::array<double, N>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double u = rng.uniform() * total;
    for (size_t i = 0; i < N; ++i) {
        if (u < weights[i]) return cats[i];
        u -= weights[i];
    }
    return cats[N - 1];
}

std::vector<Cell> synth_row_dataset1(Rng& rng, bool positive, size_t id) {
    std::vector<Cell> row;
    row.reserve(13);
    double years = clip(rng.normal(positive ? 56.0 : 50.0, positive ? 6.0 : 6.5), 32.0, 78.0);
    double days = std::round(years * 365.25);
    double height = std::round(clip(rng.normal(165.0, 8.0), 140.0, 200.0));
    double weight = std::round(clip(rng.normal(positive ? 78.0 : 71.0, positive ? 13.0 : 11.0), 42.0, 160.0));
    double ap_hi = std::round(clip(rng.normal(positive ? 135.0 : 120.0, positive ? 14.0 : 10.0), 85.0, 200.0));
    double gap = clip(rng.normal(positive ? 45.0 : 42.0, 8.0), 15.0, 70.0);
    double ap_lo = std::round(clip(ap_hi - gap, 55.0, 110.0));
    if (ap_lo >= ap_hi) ap_lo = ap_hi - 5.0;

    row.push_back(Cell::number(static_cast<double>(id)));
    row.push_back(Cell::number(days));
    row.push_back(Cell::category(rng.uniform() < 0.35 ? "2" : "1"));
    row.push_back(Cell::number(height));
    row.push_back(Cell::number(weight));
    row.push_back(Cell::number(ap_hi));
    row.push_back(Cell::number(ap_lo));
    {
        std::array<const char*, 3> lvl{"1", "2", "3"};
        std::array<double, 3> wneg{0.78, 0.14, 0.08}, wpos{0.55, 0.25, 0.20};
        row.push_back(Cell::number(std::stod(pick(rng, lvl, positive ? wpos : wneg))));
    }
    {
        std::array<const char*, 3> lvl{"1", "2", "3"};
        std::array<double, 3> wneg{0.87, 0.08, 0.05}, wpos{0.78, 0.12, 0.10};
        row.push_back(Cell::number(std::stod(pick(rng, lvl, positive ? wpos : wneg))));
    }
    row.push_back(Cell::number(rng.uniform() < 0.09 ? 1.0 : 0.0));
    row.push_back(Cell::number(rng.uniform() < 0.05 ? 1.0 : 0.0));
    row.push_back(Cell::number(rng.uniform() < (positive ? 0.76 : 0.82) ? 1.0 : 0.0));
    row.push_back(Cell::number(positive ? 1.0 : 0.0));
    return row;
}

std::vector<Cell> synth_row_dataset2(Rng& rng, bool positive) {
    std::vector<Cell> row;
    row.reserve(12);
    row.push_back(Cell::number(std::round(clip(rng.normal(positive ? 55.9 : 50.5, 8.7), 28.0, 77.0))));
    row.push_back(Cell::category(rng.uniform() < (positive ? 0.90 : 0.65) ? "M" : "F"));
    {
        std::array<const char*, 4> cats{"ASY", "ATA", "NAP", "TA"};
        std::array<double, 4> wneg{0.26, 0.35, 0.33, 0.06}, wpos{0.77, 0.05, 0.14, 0.04};
        row.push_back(Cell::category(pick(rng, cats, positive ? wpos : wneg)));
    }
    row.push_back(Cell::number(std::round(clip(rng.normal(positive ? 134.0 : 130.0, 18.0), 90.0, 200.0))));
    row.push_back(Cell::number(std::round(clip(rng.normal(positive ? 251.0 : 227.0, positive ? 60.0 : 74.0), 85.0, 480.0))));
    row.push_back(Cell::number(rng.uniform() < (positive ? 0.33 : 0.11) ? 1.0 : 0.0));
    {
        std::array<const char*, 3> cats{"Normal", "ST", "LVH"};
        std::array<double, 3> wneg{0.64, 0.17, 0.19}, wpos{0.56, 0.21, 0.23};
        row.push_back(Cell::category(pick(rng, cats, positive ? wpos : wneg)));
    }
    row.push_back(Cell::number(std::round(clip(rng.normal(positive ? 127.0 : 148.0, 23.0), 60.0, 202.0))));
    row.push_back(Cell::category(rng.uniform() < (positive ? 0.62 : 0.13) ? "Y" : "N"));
    row.push_back(Cell::number(round_to(clip(rng.normal(positive ? 1.3 : 0.4, positive ? 1.1 : 0.7), 0.0, 6.2), 0.1)));
    {
        std::array<const char*, 3> cats{"Up", "Flat", "Down"};
        std::array<double, 3> wneg{0.74, 0.20, 0.06}, wpos{0.15, 0.75, 0.10};
        row.push_back(Cell::category(pick(rng, cats, positive ? wpos : wneg)));
    }
    row.push_back(Cell::number(positive ? 1.0 : 0.0));
    return row;
}

std::vector<Cell> synth_row_generic(Rng& rng, bool positive, const DatasetDescriptor& d, size_t id) {
    std::vector<Cell> row;
    row.reserve(d.columns.size());
    double shift = positive ? 0.8 : 0.0;
    for (const auto& col : d.columns) {
        if (col.is_id) {
            row.push_back(Cell::number(static_cast<double>(id)));
            continue;
        }
        switch (col.kind) {
            case ColumnKind::NumericContinuous:
                row.push_back(Cell::number(round_to(clip(rng.normal(shift, 1.0), -4.0, 4.0), 1e-4)));
                break;
            case ColumnKind::NumericOrdinal: {
                std::array<const char*, 3> lvl{"1", "2", "3"};
                std::array<double, 3> wneg{0.7, 0.2, 0.1}, wpos{0.4, 0.3, 0.3};
                row.push_back(Cell::number(std::stod(pick(rng, lvl, positive ? wpos : wneg))));
                break;
            }
            case ColumnKind::CategoricalNominal: {
                std::array<const char*, 3> cats{"A", "B", "C"};
                std::array<double, 3> wneg{0.6, 0.3, 0.1}, wpos{0.2, 0.3, 0.5};
                row.push_back(Cell::category(pick(rng, cats, positive ? wpos : wneg)));
                break;
            }
            case ColumnKind::Binary:
                row.push_back(Cell::number(rng.uniform() < (positive ? 0.55 : 0.25) ? 1.0 : 0.0));
                break;
            case ColumnKind::Target:
                row.push_back(Cell::number(positive ? 1.0 : 0.0));
                break;
        }
    }
    return row;
}

}  // namespace

RawTable synth_generate(const DatasetDescriptor& descriptor, size_t n, double class_balance,
                        uint64_t seed) {
    descriptor.validate();
    if (class_balance < 0.0 || class_balance > 1.0)
        throw ConfigError("class_balance must be within [0, 1]");

    size_t positives = static_cast<size_t>(
        std::llround(class_balance * static_cast<double>(n)));
    positives = std::min(positives, n);

    // Label sequence first, then per-row features; one RNG stream keeps the
    // whole table a pure function of (descriptor, n, balance, seed).
    Rng rng(splitmix64(seed ^ 0x5eedf00dull));
    std::vector<uint8_t> labels(n, 0);
    for (size_t i = 0; i < positives; ++i) labels[i] = 1;
    rng.shuffle(labels);

    RawTable table;
    table.descriptor = descriptor;
    table.rows.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        bool pos = labels[i] != 0;
        if (descriptor.name == "dataset1")
            table.rows.push_back(synth_row_dataset1(rng, pos, i + 1));
        else if (descriptor.name == "dataset2")
            table.rows.push_back(synth_row_dataset2(rng, pos));
        else
            table.rows.push_back(synth_row_generic(rng, pos, descriptor, i + 1));
    }
    return table;
}

}  // namespace hycard
