#include "baserace/value_net.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace baserace {

namespace {

constexpr int kCheckpointVersion = 1;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

CellCoord to_frame(CellCoord c, Player perspective, int n) {
    if (perspective == Player::White) return c;
    return {n - 1 - c.x, n - 1 - c.y};
}

}  // namespace

NetworkTopology NetworkTopology::for_board(const BoardConfig& config) {
    const int input = config.n * config.n - 2 * config.a * config.a + kScalarFeatures;
    return {input, (input + 1) / 2};
}

FeatureVector encode_afterstate(const GameState& s, Player me) {
    const BoardConfig& cfg = s.config();
    const int n = cfg.n;
    const Player them = opponent(me);
    FeatureVector f;
    f.reserve(static_cast<std::size_t>(NetworkTopology::for_board(cfg).input));

    for (int fy = 0; fy < n; ++fy) {
        for (int fx = 0; fx < n; ++fx) {
            // The frame maps bases onto bases, so the skip test is frame-free.
            const CellCoord c = to_frame({fx, fy}, me, n);
            if (s.in_any_base(c)) continue;
            const Occupant o = s.at(c);
            if (o == Occupant::Empty) f.push_back(0.0);
            else if ((o == Occupant::White) == (me == Player::White)) f.push_back(1.0);
            else f.push_back(-1.0);
        }
    }

    const double beta = cfg.beta;
    auto closest = [&](Player p) {
        const auto pawns = s.pawns(p);
        if (pawns.empty()) return 1.0;
        int best = n;
        for (const auto& c : pawns) best = std::min(best, s.base_distance(c, opponent(p)));
        return best / static_cast<double>(n - 1);
    };
    f.push_back(s.reserve(me) / beta);
    f.push_back(s.reserve(them) / beta);
    f.push_back(s.total(me) / beta);
    f.push_back(s.total(them) / beta);
    f.push_back(s.on_board(me) / beta);
    f.push_back(s.on_board(them) / beta);
    f.push_back(closest(me));
    f.push_back(closest(them));
    f.push_back(s.side_to_move() == me ? 1.0 : -1.0);
    f.push_back(1.0);
    return f;
}

FeatureVector encode_afterstate(const ValueNetwork& net, const GameState& s) {
    if (!net.board().same_board(s.config()))
        throw ConfigMismatch("state board configuration differs from the network's");
    return encode_afterstate(s, net.owner());
}

ValueNetwork::ValueNetwork(const BoardConfig& board, Player owner)
    : board_(board), owner_(owner), topology_(NetworkTopology::for_board(board)) {
    board_.validate();
    board_.move_cap = BoardConfig{}.move_cap;  // not part of a network's identity
    w1_.assign(static_cast<std::size_t>(topology_.hidden * (topology_.input + 1)), 0.0);
    w2_.assign(static_cast<std::size_t>(topology_.hidden + 1), 0.0);
}

ValueNetwork ValueNetwork::init(const BoardConfig& board, Player owner, std::uint64_t seed,
                                double init_range) {
    ValueNetwork net(board, owner);
    if (init_range <= 0.0) return net;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-init_range, init_range);
    for (auto& w : net.w1_) w = dist(rng);
    for (auto& w : net.w2_) w = dist(rng);
    return net;
}

void ValueNetwork::check_input(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != topology_.input)
        throw DimensionMismatch("feature length " + std::to_string(x.size()) + " != " +
                                std::to_string(topology_.input));
}

double ValueNetwork::forward(std::span<const double> x) const {
    check_input(x);
    const int in = topology_.input;
    const int hid = topology_.hidden;
    double z2 = w2_[static_cast<std::size_t>(hid)];
    for (int j = 0; j < hid; ++j) {
        const double* row = &w1_[static_cast<std::size_t>(j * (in + 1))];
        double z = row[in];
        for (int k = 0; k < in; ++k) z += row[k] * x[static_cast<std::size_t>(k)];
        z2 += w2_[static_cast<std::size_t>(j)] * logistic(z);
    }
    return logistic(z2);
}

double ValueNetwork::value_and_gradient(std::span<const double> x, Gradient& grad) const {
    check_input(x);
    const int in = topology_.input;
    const int hid = topology_.hidden;
    std::vector<double> h(static_cast<std::size_t>(hid));
    double z2 = w2_[static_cast<std::size_t>(hid)];
    for (int j = 0; j < hid; ++j) {
        const double* row = &w1_[static_cast<std::size_t>(j * (in + 1))];
        double z = row[in];
        for (int k = 0; k < in; ++k) z += row[k] * x[static_cast<std::size_t>(k)];
        h[static_cast<std::size_t>(j)] = logistic(z);
        z2 += w2_[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
    }
    const double p = logistic(z2);
    const double dv_dz2 = 2.0 * p * (1.0 - p);

    grad.input_to_hidden.resize(w1_.size());
    grad.hidden_to_output.resize(w2_.size());
    for (int j = 0; j < hid; ++j) {
        const double hj = h[static_cast<std::size_t>(j)];
        grad.hidden_to_output[static_cast<std::size_t>(j)] = dv_dz2 * hj;
        const double back = dv_dz2 * w2_[static_cast<std::size_t>(j)] * hj * (1.0 - hj);
        double* row = &grad.input_to_hidden[static_cast<std::size_t>(j * (in + 1))];
        for (int k = 0; k < in; ++k) row[k] = back * x[static_cast<std::size_t>(k)];
        row[in] = back;
    }
    grad.hidden_to_output[static_cast<std::size_t>(hid)] = dv_dz2;
    return 2.0 * p - 1.0;
}

bool ValueNetwork::all_finite() const {
    auto finite = [](double w) { return std::isfinite(w); };
    return std::all_of(w1_.begin(), w1_.end(), finite) && std::all_of(w2_.begin(), w2_.end(), finite);
}

std::string checkpoint_to_string(const ValueNetwork& net) {
    nlohmann::json j;
    j["formatVersion"] = kCheckpointVersion;
    j["owner"] = std::string(to_string(net.owner()));
    j["boardConfig"] = {{"n", net.board().n}, {"a", net.board().a}, {"beta", net.board().beta}};
    j["topology"] = {{"input", net.topology().input}, {"hidden", net.topology().hidden}};
    j["inputToHidden"] = std::vector<double>(net.input_to_hidden().begin(), net.input_to_hidden().end());
    j["hiddenToOutput"] = std::vector<double>(net.hidden_to_output().begin(), net.hidden_to_output().end());
    return j.dump() + "\n";
}

ValueNetwork checkpoint_from_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (!j.contains("formatVersion") || j.at("formatVersion").get<int>() != kCheckpointVersion)
            throw FormatError("unsupported checkpoint formatVersion");
        const auto owner_text = j.at("owner").get<std::string>();
        if (owner_text != "white" && owner_text != "black") throw FormatError("bad owner '" + owner_text + "'");
        BoardConfig board;
        board.n = j.at("boardConfig").at("n").get<int>();
        board.a = j.at("boardConfig").at("a").get<int>();
        board.beta = j.at("boardConfig").at("beta").get<int>();
        try {
            board.validate();
        } catch (const InvalidConfig& e) {
            throw FormatError(std::string("checkpoint board config invalid: ") + e.what());
        }
        ValueNetwork net(board, owner_text == "white" ? Player::White : Player::Black);
        const NetworkTopology stored{j.at("topology").at("input").get<int>(),
                                     j.at("topology").at("hidden").get<int>()};
        if (!(stored == net.topology())) throw FormatError("topology disagrees with board config");
        const auto w1 = j.at("inputToHidden").get<std::vector<double>>();
        const auto w2 = j.at("hiddenToOutput").get<std::vector<double>>();
        if (w1.size() != net.input_to_hidden().size() || w2.size() != net.hidden_to_output().size())
            throw FormatError("weight array sizes disagree with topology");
        std::copy(w1.begin(), w1.end(), net.input_to_hidden().begin());
        std::copy(w2.begin(), w2.end(), net.hidden_to_output().begin());
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const ValueNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << checkpoint_to_string(net);
    if (!out) throw IoError("write failed for " + path.string());
}

ValueNetwork load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

ValueNetwork load_checkpoint(const std::filesystem::path& path, const BoardConfig& expected) {
    ValueNetwork net = load_checkpoint(path);
    if (!net.board().same_board(expected))
        throw ConfigMismatch(path.string() + " was built for a different board configuration");
    return net;
}

}  // namespace baserace
