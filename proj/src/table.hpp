#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hycard {

enum class ColumnKind {
    NumericContinuous,
    NumericOrdinal,
    CategoricalNominal,
    Binary,   // cells restricted to {0, 1}
    Target,   // binary label column; exactly one per descriptor
};

const char* column_kind_name(ColumnKind kind);

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::NumericContinuous;
    bool is_id = false;  // parsed but excluded from features and dedup
};

struct DatasetDescriptor {
    std::string name;
    std::vector<ColumnSpec> columns;

    size_t attribute_count() const;  // columns excluding ids
    size_t target_index() const;
    int column_index(const std::string& name) const;  // -1 when absent
    void validate() const;
};

enum class Dataset { Dataset1, Dataset2 };

// Column layouts of the two public Kaggle files this pipeline targets.
// dataset1: cardio_train.csv (semicolon-delimited, age in days).
// dataset2: heart.csv (comma-delimited).
DatasetDescriptor builtin_descriptor(Dataset which);
DatasetDescriptor descriptor_by_name(const std::string& name);

struct Cell {
    enum class Tag : uint8_t { Number, Category, Missing };
    Tag tag = Tag::Missing;
    double num = 0.0;
    std::string cat;

    static Cell number(double v) { return Cell{Tag::Number, v, {}}; }
    static Cell category(std::string s) { return Cell{Tag::Category, 0.0, std::move(s)}; }
    static Cell missing() { return Cell{}; }
    bool is_missing() const { return tag == Tag::Missing; }
    bool operator==(const Cell& o) const;
};

struct RawTable {
    DatasetDescriptor descriptor;
    std::vector<std::vector<Cell>> rows;

    size_t row_count() const { return rows.size(); }
    size_t column_count() const { return descriptor.columns.size(); }
};

// Loads and type-checks a CSV against the descriptor. Column names must match
// the descriptor exactly (order included). "", "NA" and "?" parse as missing.
// Parse errors name the 1-based data row and the column.
RawTable load_csv(const std::string& path, const DatasetDescriptor& descriptor);
RawTable parse_csv_text(const std::string& text, const std::string& origin,
                        const DatasetDescriptor& descriptor);

// Comma-delimited fixture output; numbers use shortest round-trip formatting,
// missing cells become empty fields.
void write_csv(const RawTable& table, const std::string& path);
std::string table_to_csv_text(const RawTable& table);

// Deterministic synthetic table for fixtures and experiments. The positive
// class count is llround(n * class_balance) and feature distributions are
// class-conditioned so the labels are learnable.
RawTable synth_generate(const DatasetDescriptor& descriptor, size_t n, double class_balance,
                        uint64_t seed);

}  // namespace hycard
