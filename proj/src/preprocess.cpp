#include "preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace hycard {

// ---------------------------------------------------------------------------
// OutlierRules
// ---------------------------------------------------------------------------

std::string OutlierRules::to_json() const {
    nlohmann::ordered_json j;
    j["bounds"] = nlohmann::ordered_json::object();
    for (const auto& b : bounds) j["bounds"][b.column] = {b.lo, b.hi};
    j["relational"] = nlohmann::ordered_json::array();
    for (const auto& r : relational) j["relational"].push_back(r.left + r.op + r.right);
    return j.dump();
}

OutlierRules OutlierRules::from_json(const std::string& json_text) {
    nlohmann::ordered_json j;  // keep the author's bound order
    try {
        j = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("outlier rules: invalid JSON: ") + e.what());
    }
    OutlierRules rules;
    if (j.contains("bounds")) {
        for (auto it = j["bounds"].begin(); it != j["bounds"].end(); ++it) {
            const auto& v = it.value();
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ConfigError("outlier rules: bound for '" + it.key() + "' must be [lo, hi]");
            double lo = v[0].get<double>(), hi = v[1].get<double>();
            if (lo > hi)
                throw ConfigError("outlier rules: bound for '" + it.key() + "' has lo > hi");
            rules.bounds.push_back({it.key(), lo, hi});
        }
    }
    if (j.contains("relational")) {
        for (const auto& v : j["relational"]) {
            if (!v.is_string())
                throw ConfigError("outlier rules: relational entries must be strings");
            std::string s = v.get<std::string>();
            size_t pos = s.find_first_of("><");
            if (pos == std::string::npos || pos == 0 || pos + 1 >= s.size())
                throw ConfigError("outlier rules: cannot parse relational rule '" + s + "'");
            rules.relational.push_back({s.substr(0, pos), s[pos], s.substr(pos + 1)});
        }
    }
    return rules;
}

OutlierRules OutlierRules::physiologic_dataset1() {
    OutlierRules r;
    r.bounds = {
        {"ap_hi", 60, 250}, {"ap_lo", 40, 180}, {"height", 120, 220},
        {"weight", 30, 200}, {"age", 18, 100},
    };
    r.relational = {{"ap_hi", '>', "ap_lo"}};
    return r;
}

OutlierRules OutlierRules::default_dataset1() {
    // Trims distribution tails on height/weight/pressure in addition to the
    // physiologically impossible readings; keeps roughly 88-92% of the raw file.
    OutlierRules r;
    r.bounds = {
        {"ap_hi", 85, 200}, {"ap_lo", 55, 115}, {"height", 148, 186},
        {"weight", 47, 115}, {"age", 18, 100},
    };
    r.relational = {{"ap_hi", '>', "ap_lo"}};
    return r;
}

// ---------------------------------------------------------------------------
// Cleaning passes
// ---------------------------------------------------------------------------

namespace {

std::string row_key(const RawTable& table, const std::vector<Cell>& row) {
    std::string key;
    key.reserve(row.size() * 10);
    for (size_t c = 0; c < row.size(); ++c) {
        if (table.descriptor.columns[c].is_id) continue;
        const Cell& cell = row[c];
        switch (cell.tag) {
            case Cell::Tag::Number: {
                key.push_back('n');
                char buf[8];
                std::memcpy(buf, &cell.num, 8);
                key.append(buf, 8);
                break;
            }
            case Cell::Tag::Category:
                key.push_back('c');
                key.append(cell.cat);
                break;
            case Cell::Tag::Missing:
                key.push_back('m');
                break;
        }
        key.push_back('\x1f');
    }
    return key;
}

}  // namespace

RawTable deduplicate(const RawTable& table) {
    RawTable out;
    out.descriptor = table.descriptor;
    out.rows.reserve(table.rows.size());
    std::unordered_set<std::string> seen;
    seen.reserve(table.rows.size() * 2);
    for (const auto& row : table.rows) {
        if (seen.insert(row_key(table, row)).second) out.rows.push_back(row);
    }
    return out;
}

std::pair<RawTable, size_t> filter_outliers(const RawTable& table, const OutlierRules& rules) {
    struct BoundIdx {
        size_t col;
        double lo, hi;
    };
    struct RelIdx {
        size_t left, right;
        char op;
    };
    std::vector<BoundIdx> bounds;
    std::vector<RelIdx> rels;
    for (const auto& b : rules.bounds) {
        int idx = table.descriptor.column_index(b.column);
        if (idx < 0) throw ConfigError("outlier rule references unknown column '" + b.column + "'");
        bounds.push_back({static_cast<size_t>(idx), b.lo, b.hi});
    }
    for (const auto& r : rules.relational) {
        int li = table.descriptor.column_index(r.left);
        int ri = table.descriptor.column_index(r.right);
        if (li < 0) throw ConfigError("outlier rule references unknown column '" + r.left + "'");
        if (ri < 0) throw ConfigError("outlier rule references unknown column '" + r.right + "'");
        rels.push_back({static_cast<size_t>(li), static_cast<size_t>(ri), r.op});
    }

    RawTable out;
    out.descriptor = table.descriptor;
    out.rows.reserve(table.rows.size());
    size_t removed = 0;
    for (const auto& row : table.rows) {
        bool keep = true;
        for (const auto& b : bounds) {
            const Cell& cell = row[b.col];
            if (cell.tag != Cell::Tag::Number) continue;  // missing cells are handled later
            if (cell.num < b.lo || cell.num > b.hi) {
                keep = false;
                break;
            }
        }
        if (keep) {
            for (const auto& r : rels) {
                const Cell& a = row[r.left];
                const Cell& b = row[r.right];
                if (a.tag != Cell::Tag::Number || b.tag != Cell::Tag::Number) continue;
                bool ok = r.op == '>' ? a.num > b.num : a.num < b.num;
                if (!ok) {
                    keep = false;
                    break;
                }
            }
        }
        if (keep)
            out.rows.push_back(row);
        else
            ++removed;
    }
    return {std::move(out), removed};
}

long age_days_to_years(long days) {
    if (days < 0) throw DataError("age in days must be non-negative");
    return static_cast<long>(std::floor(static_cast<double>(days) / 365.25));
}

BPCategory categorize_bp(double systolic, double diastolic) {
    if (systolic <= 0.0 || diastolic <= 0.0)
        throw DataError("blood pressure readings must be positive");
    // Stage bands are stated for integer mmHg; half-open upper edges keep the
    // mapping total and monotone for real-valued inputs.
    if (systolic > 180.0 || diastolic > 120.0) return BPCategory::Crisis;
    if (systolic >= 140.0 || diastolic >= 90.0) return BPCategory::Stage2;
    if (systolic >= 130.0 || diastolic >= 80.0) return BPCategory::Stage1;
    if (systolic >= 120.0) return BPCategory::Elevated;
    return BPCategory::Normal;
}

PrepareOptions default_prepare_options(const DatasetDescriptor& descriptor) {
    PrepareOptions opt;
    if (descriptor.name == "dataset1") {
        opt.convert_age_days = true;
        opt.add_bp_category = true;
        opt.rules = OutlierRules::default_dataset1();
    }
    return opt;
}

RawTable prepare_table(const RawTable& table, const PrepareOptions& options,
                       PrepareReport* report) {
    PrepareReport rep;
    rep.rows_in = table.row_count();

    RawTable work = table;
    if (options.drop_missing_target) {
        size_t target = work.descriptor.target_index();
        size_t before = work.rows.size();
        std::erase_if(work.rows, [&](const std::vector<Cell>& r) { return r[target].is_missing(); });
        rep.missing_target_dropped = before - work.rows.size();
    }
    if (options.dedup) {
        size_t before = work.rows.size();
        work = deduplicate(work);
        rep.duplicates_removed = before - work.rows.size();
    }
    if (options.convert_age_days) {
        int age = work.descriptor.column_index("age");
        if (age < 0) throw ConfigError("age conversion requested but column 'age' is absent");
        for (auto& row : work.rows) {
            Cell& cell = row[static_cast<size_t>(age)];
            if (cell.tag == Cell::Tag::Number)
                cell.num = static_cast<double>(age_days_to_years(static_cast<long>(cell.num)));
        }
    }
    if (!options.rules.empty()) {
        auto [filtered, removed] = filter_outliers(work, options.rules);
        work = std::move(filtered);
        rep.outliers_removed = removed;
    }
    if (options.add_bp_category) {
        int hi = work.descriptor.column_index("ap_hi");
        int lo = work.descriptor.column_index("ap_lo");
        if (hi < 0 || lo < 0)
            throw ConfigError("bp categorization requested but ap_hi/ap_lo are absent");
        work.descriptor.columns.push_back({"bp_category", ColumnKind::NumericOrdinal, false});
        for (auto& row : work.rows) {
            const Cell& h = row[static_cast<size_t>(hi)];
            const Cell& l = row[static_cast<size_t>(lo)];
            if (h.tag == Cell::Tag::Number && l.tag == Cell::Tag::Number && h.num > 0 && l.num > 0)
                row.push_back(Cell::number(static_cast<double>(categorize_bp(h.num, l.num))));
            else
                row.push_back(Cell::missing());
        }
    }
    rep.rows_out = work.rows.size();
    if (report) *report = rep;
    return work;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

FeatureMatrix FeatureMatrix::zeros(size_t n, size_t d) {
    FeatureMatrix m;
    m.n = n;
    m.d = d;
    m.values.assign(n * d, 0.0);
    return m;
}

ImputeStats fit_imputer(const RawTable& table, const std::vector<size_t>& rows) {
    const size_t ncols = table.descriptor.columns.size();
    ImputeStats stats;
    stats.numeric_fill.assign(ncols, 0.0);
    stats.category_fill.assign(ncols, "");
    for (size_t c = 0; c < ncols; ++c) {
        const auto& col = table.descriptor.columns[c];
        if (col.is_id || col.kind == ColumnKind::Target) continue;
        if (col.kind == ColumnKind::CategoricalNominal) {
            std::map<std::string, size_t> counts;
            for (size_t r : rows) {
                const Cell& cell = table.rows[r][c];
                if (cell.tag == Cell::Tag::Category) ++counts[cell.cat];
            }
            size_t best = 0;
            for (const auto& [cat, cnt] : counts) {
                if (cnt > best) {  // std::map iterates lexicographically, so ties keep the smaller key
                    best = cnt;
                    stats.category_fill[c] = cat;
                }
            }
        } else {
            std::vector<double> vals;
            vals.reserve(rows.size());
            for (size_t r : rows) {
                const Cell& cell = table.rows[r][c];
                if (cell.tag == Cell::Tag::Number) vals.push_back(cell.num);
            }
            if (!vals.empty()) {
                std::sort(vals.begin(), vals.end());
                size_t m = vals.size();
                stats.numeric_fill[c] =
                    (m % 2 == 1) ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
            }
        }
    }
    return stats;
}

EncodingMap fit_encoding(const RawTable& table, const std::vector<size_t>& rows) {
    EncodingMap map;
    for (size_t c = 0; c < table.descriptor.columns.size(); ++c) {
        const auto& col = table.descriptor.columns[c];
        if (col.is_id || col.kind == ColumnKind::Target) continue;
        EncodingMap::Column enc{col.name, col.kind, {}};
        if (col.kind == ColumnKind::CategoricalNominal) {
            std::vector<std::string> cats;
            {
                std::unordered_set<std::string> seen;
                for (size_t r : rows) {
                    const Cell& cell = table.rows[r][c];
                    if (cell.tag == Cell::Tag::Category && seen.insert(cell.cat).second)
                        cats.push_back(cell.cat);
                }
            }
            std::sort(cats.begin(), cats.end());
            enc.categories = std::move(cats);
            map.groups.push_back({map.dim, enc.categories.size(), true});
            for (const auto& cat : enc.categories) map.feature_names.push_back(col.name + "=" + cat);
            map.dim += enc.categories.size();
        } else {
            map.groups.push_back({map.dim, 1, false});
            map.feature_names.push_back(col.name);
            map.dim += 1;
        }
        map.columns.push_back(std::move(enc));
    }
    return map;
}

EncodedData apply_encoding(const RawTable& table, const EncodingMap& map,
                           const std::vector<size_t>& rows, const ImputeStats* imputer) {
    EncodedData out;
    out.X = FeatureMatrix::zeros(rows.size(), map.dim);
    out.X.feature_names = map.feature_names;
    out.y.reserve(rows.size());

    // Map encoded columns back to table columns by name once.
    std::vector<size_t> table_col(map.columns.size());
    for (size_t i = 0; i < map.columns.size(); ++i) {
        int idx = table.descriptor.column_index(map.columns[i].name);
        if (idx < 0)
            throw DataError("encoding map references column '" + map.columns[i].name +
                            "' absent from the table");
        if (table.descriptor.columns[static_cast<size_t>(idx)].kind != map.columns[i].kind)
            throw DataError("encoding map column '" + map.columns[i].name + "' has mismatched kind");
        table_col[i] = static_cast<size_t>(idx);
    }
    const size_t target = table.descriptor.target_index();

    for (size_t out_r = 0; out_r < rows.size(); ++out_r) {
        size_t r = rows[out_r];
        const auto& row = table.rows[r];
        for (size_t i = 0; i < map.columns.size(); ++i) {
            const auto& enc = map.columns[i];
            const auto& group = map.groups[i];
            const Cell& cell = row[table_col[i]];
            if (enc.kind == ColumnKind::CategoricalNominal) {
                std::string cat;
                if (cell.tag == Cell::Tag::Category) {
                    cat = cell.cat;
                } else if (cell.is_missing()) {
                    if (!imputer)
                        throw DataError("missing cell in column '" + enc.name +
                                        "' with no imputation statistics");
                    cat = imputer->category_fill[table_col[i]];
                } else {
                    throw DataError("column '" + enc.name + "' holds a numeric cell, expected category");
                }
                auto it = std::lower_bound(enc.categories.begin(), enc.categories.end(), cat);
                if (it != enc.categories.end() && *it == cat) {
                    size_t slot = static_cast<size_t>(it - enc.categories.begin());
                    out.X.at(out_r, group.offset + slot) = 1.0;
                } else {
                    ++out.unseen_cells;  // all-zero group
                }
            } else {
                double v;
                if (cell.tag == Cell::Tag::Number) {
                    v = cell.num;
                } else if (cell.is_missing()) {
                    if (!imputer)
                        throw DataError("missing cell in column '" + enc.name +
                                        "' with no imputation statistics");
                    v = imputer->numeric_fill[table_col[i]];
                } else {
                    throw DataError("column '" + enc.name + "' holds a category cell, expected number");
                }
                out.X.at(out_r, group.offset) = v;
            }
        }
        const Cell& t = row[target];
        if (t.tag != Cell::Tag::Number || (t.num != 0.0 && t.num != 1.0))
            throw DataError("row " + std::to_string(r + 1) + ": target cell is missing or non-binary");
        out.y.push_back(static_cast<int>(t.num));
    }
    return out;
}

EncodedData encode(const RawTable& table, EncodingMap* map_out) {
    std::vector<size_t> rows(table.row_count());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    EncodingMap map = fit_encoding(table, rows);
    EncodedData data = apply_encoding(table, map, rows, nullptr);
    if (map_out) *map_out = std::move(map);
    return data;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

NormalizationParams fit_normalizer(const FeatureMatrix& X, const std::vector<size_t>& rows) {
    if (rows.empty()) throw ConfigError("fit_normalizer: row subset is empty");
    NormalizationParams p;
    p.min.assign(X.d, 0.0);
    p.max.assign(X.d, 0.0);
    for (size_t c = 0; c < X.d; ++c) {
        double lo = X.at(rows[0], c), hi = lo;
        for (size_t i = 1; i < rows.size(); ++i) {
            double v = X.at(rows[i], c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        p.min[c] = lo;
        p.max[c] = hi;
    }
    return p;
}

FeatureMatrix apply_normalizer(const FeatureMatrix& X, const NormalizationParams& params) {
    if (params.dim() != X.d)
        throw ConfigError("apply_normalizer: params dimension " + std::to_string(params.dim()) +
                          " does not match feature count " + std::to_string(X.d));
    FeatureMatrix out = X;
    for (size_t c = 0; c < X.d; ++c) {
        double range = params.max[c] - params.min[c];
        for (size_t r = 0; r < X.n; ++r) {
            double& v = out.at(r, c);
            v = range > 0.0 ? (v - params.min[c]) / range : 0.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// SMOTE
// ---------------------------------------------------------------------------

SmoteResult smote_oversample(const FeatureMatrix& X, const LabelVector& y, size_t k, uint64_t seed,
                             const std::vector<EncodingMap::Group>* snap_groups) {
    if (X.n != y.size()) throw ConfigError("smote_oversample: X and y sizes differ");
    size_t pos = 0;
    for (int v : y) pos += static_cast<size_t>(v);
    size_t neg = y.size() - pos;

    SmoteResult res;
    res.X = X;
    res.y = y;
    res.synthetic.assign(X.n, 0);
    res.k_used = k;
    if (pos == neg) return res;

    const int minority_label = pos < neg ? 1 : 0;
    std::vector<size_t> minority;
    for (size_t i = 0; i < y.size(); ++i)
        if (y[i] == minority_label) minority.push_back(i);
    const size_t m = minority.size();
    if (m < 2) throw DataError("smote_oversample: minority class has fewer than 2 samples");
    if (k < 1) throw ConfigError("smote_oversample: k must be >= 1");

    size_t k_eff = k;
    if (k_eff >= m) {
        k_eff = m - 1;
        res.k_clamped = true;
    }
    res.k_used = k_eff;

    // k nearest minority neighbors per minority row; ties resolved by lower row index.
    std::vector<std::vector<size_t>> neighbors(m);
    {
        std::vector<std::pair<double, size_t>> dist(m - 1);
        for (size_t a = 0; a < m; ++a) {
            size_t w = 0;
            for (size_t b = 0; b < m; ++b) {
                if (a == b) continue;
                double d2 = 0;
                const double* pa = X.row(minority[a]);
                const double* pb = X.row(minority[b]);
                for (size_t c = 0; c < X.d; ++c) {
                    double diff = pa[c] - pb[c];
                    d2 += diff * diff;
                }
                dist[w++] = {d2, minority[b]};
            }
            std::sort(dist.begin(), dist.end());
            neighbors[a].reserve(k_eff);
            for (size_t i = 0; i < k_eff; ++i) neighbors[a].push_back(dist[i].second);
        }
    }

    const size_t need = (pos > neg ? pos : neg) - m;
    Rng rng(splitmix64(seed ^ 0x50a75eedull));
    res.X.values.reserve((X.n + need) * X.d);
    for (size_t s = 0; s < need; ++s) {
        size_t bi = rng.index(m);
        size_t base = minority[bi];
        size_t nn = neighbors[bi][rng.index(k_eff)];
        double lambda = rng.uniform();

        std::vector<double> row(X.d);
        const double* pb = X.row(base);
        const double* pn = X.row(nn);
        for (size_t c = 0; c < X.d; ++c) row[c] = pb[c] + lambda * (pn[c] - pb[c]);
        if (snap_groups) {
            for (const auto& g : *snap_groups) {
                if (!g.one_hot) continue;
                const double* parent = lambda <= 0.5 ? pb : pn;
                for (size_t c = g.offset; c < g.offset + g.size; ++c) row[c] = parent[c];
            }
        }
        res.X.values.insert(res.X.values.end(), row.begin(), row.end());
        res.X.n += 1;
        res.y.push_back(minority_label);
        res.synthetic.push_back(1);
        res.origins.push_back({base, nn, lambda});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Holdout split
// ---------------------------------------------------------------------------

std::pair<std::vector<size_t>, std::vector<size_t>> split_holdout(size_t n, double test_fraction,
                                                                  uint64_t seed,
                                                                  const LabelVector& y) {
    if (n < 2) throw ConfigError("split_holdout: need at least 2 rows");
    if (y.size() != n) throw ConfigError("split_holdout: label count does not match n");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("split_holdout: test_fraction must lie in (0, 1)");

    std::vector<size_t> by_class[2];
    for (size_t i = 0; i < n; ++i) by_class[y[i] ? 1 : 0].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < 2)
            throw DataError("split_holdout: class " + std::to_string(c) +
                            " has fewer than 2 members");

    std::vector<size_t> train, test;
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        Rng rng(derive_seed(seed, 0x5317ull ^ static_cast<uint64_t>(c)));
        rng.shuffle(idx);
        size_t want = static_cast<size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        want = std::min(want, idx.size() - 1);
        for (size_t i = 0; i < idx.size(); ++i)
            (i < want ? test : train).push_back(idx[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

}  // namespace hycard
