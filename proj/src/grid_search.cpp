#include <annulus/models.hpp>

#include <annulus/error.hpp>
#include <annulus/parallel.hpp>

#include <climits>
#include <cmath>
#include <tuple>

namespace annulus {

namespace {

int unlimited_last(int v) { return v < 0 ? INT_MAX : v; }

// True when cell a should be preferred over cell b at equal accuracy.
bool smaller_model(const ForestParams& a, const ForestParams& b) {
    return std::make_tuple(a.n_estimators, unlimited_last(a.max_depth), unlimited_last(a.max_leaf_nodes)) <
           std::make_tuple(b.n_estimators, unlimited_last(b.max_depth), unlimited_last(b.max_leaf_nodes));
}

} // namespace

double accuracy(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted) {
    if (truth.size() != predicted.size() || truth.size() == 0)
        throw Error(ErrorKind::Input, "accuracy: length mismatch");
    return static_cast<double>((truth.array() == predicted.array()).count()) / static_cast<double>(truth.size());
}

std::vector<ForestParams> grid_preset(const std::string& name) {
    if (name == "quick") return {ForestParams{}};
    if (name != "default") throw Error(ErrorKind::Input, "unknown grid preset '" + name + "'");
    std::vector<ForestParams> grid;
    for (int estimators : {100, 200, 500})
        for (MaxFeatures rule : {MaxFeatures::Sqrt, MaxFeatures::Log2})
            for (int depth : {3, 5, 10, -1})
                for (int leaves : {10, 50, -1}) grid.push_back({estimators, rule, depth, leaves});
    return grid;
}

GridSearchResult grid_search(const std::vector<FoldData>& folds, const std::vector<ForestParams>& grid,
                             std::uint64_t seed, unsigned threads) {
    if (grid.empty()) throw Error(ErrorKind::Input, "grid_search: empty grid");
    if (folds.empty()) throw Error(ErrorKind::Input, "grid_search: no folds");

    GridSearchResult result;
    result.cells.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t c) {
        GridCell cell;
        cell.params = grid[c];
        for (const auto& fold : folds) {
            const auto model = rf_fit(fold.train_x, fold.train_y, fold.names, grid[c], seed, 1);
            cell.fold_accuracy.push_back(accuracy(fold.val_y, rf_predict(model, fold.val_x).labels));
        }
        double sum = 0;
        for (double a : cell.fold_accuracy) sum += a;
        cell.mean_accuracy = sum / static_cast<double>(cell.fold_accuracy.size());
        double ss = 0;
        for (double a : cell.fold_accuracy) ss += (a - cell.mean_accuracy) * (a - cell.mean_accuracy);
        cell.std_accuracy = std::sqrt(ss / static_cast<double>(cell.fold_accuracy.size()));
        result.cells[c] = std::move(cell);
    });

    for (std::size_t c = 1; c < result.cells.size(); ++c) {
        const auto& cand = result.cells[c];
        const auto& best = result.cells[result.best];
        const double diff = cand.mean_accuracy - best.mean_accuracy;
        if (diff > 1e-12 || (std::abs(diff) <= 1e-12 && smaller_model(cand.params, best.params))) result.best = c;
    }
    return result;
}

GridSearchResult grid_search(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                             const std::vector<std::string>& names, const std::vector<ForestParams>& grid,
                             const std::vector<std::pair<std::vector<int>, std::vector<int>>>& folds,
                             std::uint64_t seed, unsigned threads) {
    std::vector<FoldData> data;
    for (const auto& [train, val] : folds) {
        FoldData f;
        f.names = names;
        f.train_x.resize(static_cast<Eigen::Index>(train.size()), x.cols());
        f.train_y.resize(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            f.train_x.row(i) = x.row(train[i]);
            f.train_y(i) = y(train[i]);
        }
        f.val_x.resize(static_cast<Eigen::Index>(val.size()), x.cols());
        f.val_y.resize(static_cast<Eigen::Index>(val.size()));
        for (std::size_t i = 0; i < val.size(); ++i) {
            f.val_x.row(i) = x.row(val[i]);
            f.val_y(i) = y(val[i]);
        }
        data.push_back(std::move(f));
    }
    return grid_search(data, grid, seed, threads);
}

} // namespace annulus
