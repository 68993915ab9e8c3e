#include "lmdp/io.hpp"
#include "lmdp/error.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lmdp::io {

using json = nlohmann::json;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
    out << content;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

namespace {

json vec_json(const Vector& v) {
    json a = json::array();
    for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

Vector json_vec(const json& a) {
    Vector v(static_cast<Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) v[static_cast<Index>(k)] = a[k].get<double>();
    return v;
}

json mat_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix json_mat(const json& rows) {
    const Index nr = static_cast<Index>(rows.size());
    const Index nc = nr > 0 ? static_cast<Index>(rows[0].size()) : 0;
    Matrix m(nr, nc);
    for (Index r = 0; r < nr; ++r) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(r)].size()) != nc)
            throw Error(ErrorCode::ParseError, "ragged matrix");
        for (Index c = 0; c < nc; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

json triples_json(const SparseMatrix& m, Index row_offset = 0) {
    json t = json::array();
    for (Index c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it)
            t.push_back(json::array({c, row_offset + it.row(), it.value()}));
    return t;
}

json lmdp_json(const Lmdp& L) {
    json j;
    j["n_interior"] = L.n_interior();
    j["n_boundary"] = L.n_boundary();
    j["lambda"] = L.lambda();
    j["r_i"] = vec_json(L.rewards().r_i);
    j["r_b"] = vec_json(L.rewards().r_b);
    json passive = triples_json(L.P_i());
    for (auto& e : triples_json(L.P_b(), L.n_interior())) passive.push_back(e);
    j["passive"] = std::move(passive);
    if (!L.partition().labels.empty()) j["labels"] = L.partition().labels;
    return j;
}

Lmdp lmdp_of(const json& j) {
    const Index ni = j.at("n_interior").get<Index>();
    const Index nb = j.at("n_boundary").get<Index>();
    std::vector<Triplet> ti, tb;
    for (const auto& e : j.at("passive")) {
        if (!e.is_array() || e.size() != 3) throw Error(ErrorCode::ParseError, "passive entries are [source, target, p]");
        const Index s = e[0].get<Index>();
        const Index t = e[1].get<Index>();
        const double p = e[2].get<double>();
        if (s < 0 || s >= ni || t < 0 || t >= ni + nb)
            throw Error(ErrorCode::DimensionMismatch, "passive triple out of range");
        if (t < ni) ti.emplace_back(t, s, p);
        else tb.emplace_back(t - ni, s, p);
    }
    SparseMatrix Pi(ni, ni), Pb(nb, ni);
    Pi.setFromTriplets(ti.begin(), ti.end());
    Pb.setFromTriplets(tb.begin(), tb.end());
    StatePartition part{ni, nb, {}};
    if (j.contains("labels")) part.labels = j["labels"].get<std::vector<std::string>>();
    RewardModel rew{json_vec(j.at("r_i")), json_vec(j.at("r_b")), j.at("lambda").get<double>()};
    return build_lmdp(std::move(part), {std::move(Pi), std::move(Pb)}, std::move(rew));
}

template <class F>
auto parse(const std::string& text, F&& f) {
    try {
        return f(json::parse(text));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

} // namespace

std::string lmdp_to_json(const Lmdp& lmdp) { return lmdp_json(lmdp).dump(1) + "\n"; }

Lmdp lmdp_from_json(const std::string& text) {
    return parse(text, [](const json& j) { return lmdp_of(j); });
}

std::string basis_to_json(const TaskBasis& basis) {
    json j = lmdp_json(*basis.lmdp);
    j["Q_b"] = mat_json(basis.Q_b);
    j["Z_i"] = mat_json(basis.Z_i);
    return j.dump(1) + "\n";
}

TaskBasis basis_from_json(const std::string& text) {
    return parse(text, [](const json& j) {
        auto L = std::make_shared<const Lmdp>(lmdp_of(j));
        return build_task_basis(L, json_mat(j.at("Q_b")));
    });
}

std::string desirability_csv(const Lmdp& lmdp, const Desirability& z) {
    const Vector V = value_from_desirability(z, lmdp.lambda());
    std::string out = "state_index,label,z,V\n";
    for (Index s = 0; s < lmdp.size(); ++s) {
        const double zs = s < lmdp.n_interior() ? z.z_i[s] : z.z_b[s - lmdp.n_interior()];
        out += std::to_string(s) + "," + lmdp.label(s) + "," + format_double(zs) + "," + format_double(V[s]) + "\n";
    }
    return out;
}

std::string policy_csv(const PolicyMatrix& policy) {
    std::string out = "source,target,probability\n";
    for (Index c = 0; c < policy.outerSize(); ++c)
        for (PolicyMatrix::InnerIterator it(policy, c); it; ++it)
            out += std::to_string(c) + "," + std::to_string(it.row()) + "," + format_double(it.value()) + "\n";
    return out;
}

std::string weights_csv(const TaskWeights& w) {
    std::string out = "task_index,weight\n";
    for (Index k = 0; k < w.w.size(); ++k) out += std::to_string(k) + "," + format_double(w.w[k]) + "\n";
    return out;
}

StackDocuments stack_to_json(const HierarchyStack& stack) {
    StackDocuments docs;
    json manifest;
    manifest["depth"] = stack.depth();
    manifest["kappa"] = stack.kappa();
    manifest["penalty"] = stack.options().penalty;
    manifest["higher_interior_reward"] = stack.options().higher_interior_reward;
    manifest["blend"] = to_string(stack.options().method);
    json layers = json::array();
    for (Index l = 0; l < stack.depth(); ++l) {
        const LayerModel& m = stack.model(l);
        const LayerState& st = stack.state(l);
        json layer;
        layer["index"] = l;
        layer["document"] = "layer" + std::to_string(l) + ".json";
        layer["n_interior"] = m.lmdp->n_interior();
        layer["augmented"] = m.augmented();
        if (m.augmented()) {
            layer["n_subtasks"] = m.aug->n_subtasks();
            layer["P_t"] = triples_json(m.aug->P_t);
            std::vector<bool> live(static_cast<std::size_t>(m.aug->n_subtasks()), st.subtasks_live);
            layer["live_subtasks"] = live;
            layer["subtask_labels"] = m.aug->labels;
        }
        layer["terminated"] = st.terminated;
        layers.push_back(std::move(layer));

        json doc = lmdp_json(*m.lmdp);
        doc["Q_b"] = mat_json(m.Q_b);
        if (m.augmented()) {
            doc["Q_t"] = mat_json(m.aug->Q_t);
            doc["Z_i"] = mat_json(m.aug->basis.Z_i);
        } else {
            doc["Z_i"] = mat_json(m.top_basis->Z_i);
        }
        docs.layers.push_back(doc.dump(1) + "\n");
    }
    manifest["layers"] = std::move(layers);
    docs.manifest = manifest.dump(1) + "\n";
    return docs;
}

std::string trajectory_csv(const HierarchicalTrajectory& traj, const Lmdp& base) {
    std::string out = "t,state,layer_accessed,event\n";
    std::size_t next_event = 0;
    for (std::size_t t = 0; t < traj.base_states.size(); ++t) {
        const Index s = traj.base_states[t];
        Index layer = 0;
        std::string event = t == 0 ? "start" : "step";
        // access events at base time t-1 belong to the transition arriving at t
        if (t > 0 && next_event < traj.access_events.size() &&
            traj.access_events[next_event].base_time == static_cast<Index>(t) - 1) {
            const auto& ev = traj.access_events[next_event++];
            layer = ev.layer_reached;
            event = ev.terminated_layer >= 0 ? "access_terminate" + std::to_string(ev.terminated_layer) : "access";
        }
        if (s >= base.n_interior()) event += "_boundary";
        out += std::to_string(t) + "," + base.label(s) + "," + std::to_string(layer) + "," + event + "\n";
    }
    if (traj.max_steps_exceeded) out += std::to_string(traj.base_states.size()) + ",,0,max_steps\n";
    return out;
}

std::string snapshots_csv(const HierarchicalTrajectory& traj) {
    std::string out = "event_id,layer,task_index,weight\n";
    for (const auto& s : traj.weight_snapshots)
        for (Index k = 0; k < s.w.size(); ++k)
            out += std::to_string(s.event_id) + "," + std::to_string(s.layer) + "," + std::to_string(k) + "," +
                   format_double(s.w[k]) + "\n";
    return out;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
    std::string out = "N,condition,total_iterations,nonzeros\n";
    for (const auto& r : rows)
        out += std::to_string(r.n_states) + "," + r.condition + "," + std::to_string(r.total_iterations) + "," +
               std::to_string(r.nonzeros) + "\n";
    return out;
}

} // namespace lmdp::io
