// Copyright 2026 Pipematch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pipematch/blossom.h"

#include <algorithm>
#include <stdexcept>

namespace pipematch {

namespace {

// Array-based formulation after van Rantwijk's reference implementation. Edge k has endpoints 2k
// and 2k+1; endpoint p belongs to vertex endpoint[p], and p ^ 1 is the opposite end. Dual variables
// are stored doubled so that all arithmetic stays integral.
class Solver {
   public:
    Solver(size_t n, std::span<const WeightedPair> edges, bool max_cardinality)
        : nvertex(n), edges(edges.begin(), edges.end()), max_cardinality(max_cardinality) {
        int64_t max_weight = 0;
        for (const auto &e : edges) {
            if (e.u >= n || e.v >= n || e.u == e.v) {
                throw std::invalid_argument("max_weight_matching: bad edge");
            }
            max_weight = std::max(max_weight, e.weight);
        }
        size_t nedge = edges.size();
        endpoint.resize(2 * nedge);
        neighbend.assign(n, {});
        for (size_t k = 0; k < nedge; k++) {
            endpoint[2 * k] = (int)edges[k].u;
            endpoint[2 * k + 1] = (int)edges[k].v;
            neighbend[edges[k].u].push_back((int)(2 * k + 1));
            neighbend[edges[k].v].push_back((int)(2 * k));
        }
        mate.assign(n, -1);
        label.assign(2 * n, 0);
        labelend.assign(2 * n, -1);
        inblossom.resize(n);
        for (size_t v = 0; v < n; v++) {
            inblossom[v] = (int)v;
        }
        blossomparent.assign(2 * n, -1);
        blossomchilds.assign(2 * n, {});
        blossombase.assign(2 * n, -1);
        for (size_t v = 0; v < n; v++) {
            blossombase[v] = (int)v;
        }
        blossomendps.assign(2 * n, {});
        bestedge.assign(2 * n, -1);
        blossombestedges.assign(2 * n, {});
        has_bestedges.assign(2 * n, false);
        for (size_t b = 2 * n; b-- > n;) {
            unusedblossoms.push_back((int)b);
        }
        std::reverse(unusedblossoms.begin(), unusedblossoms.end());
        dualvar.assign(2 * n, 0);
        for (size_t v = 0; v < n; v++) {
            dualvar[v] = max_weight;
        }
        allowedge.assign(nedge, 0);
    }

    std::vector<int32_t> solve();

   private:
    int n() const {
        return (int)nvertex;
    }
    int64_t slack(int k) const {
        const auto &e = edges[k];
        return dualvar[e.u] + dualvar[e.v] - 2 * e.weight;
    }
    void leaves(int b, std::vector<int> &out) const {
        if (b < n()) {
            out.push_back(b);
            return;
        }
        for (int t : blossomchilds[b]) {
            leaves(t, out);
        }
    }
    std::vector<int> leaves(int b) const {
        std::vector<int> out;
        leaves(b, out);
        return out;
    }
    static int wrap(int j, size_t len) {
        int m = (int)len;
        return ((j % m) + m) % m;
    }

    void assign_label(int w, int t, int p);
    int scan_blossom(int v, int w);
    void add_blossom(int base, int k);
    void expand_blossom(int b, bool endstage);
    void augment_blossom(int b, int v);
    void augment_matching(int k);

    size_t nvertex;
    std::vector<WeightedPair> edges;
    bool max_cardinality;
    std::vector<int> endpoint;
    std::vector<std::vector<int>> neighbend;
    std::vector<int> mate;
    std::vector<int> label;
    std::vector<int> labelend;
    std::vector<int> inblossom;
    std::vector<int> blossomparent;
    std::vector<std::vector<int>> blossomchilds;
    std::vector<int> blossombase;
    std::vector<std::vector<int>> blossomendps;
    std::vector<int> bestedge;
    std::vector<std::vector<int>> blossombestedges;
    std::vector<bool> has_bestedges;
    std::vector<int> unusedblossoms;
    std::vector<int64_t> dualvar;
    std::vector<char> allowedge;
    std::vector<int> queue;
};

void Solver::assign_label(int w, int t, int p) {
    int b = inblossom[w];
    label[w] = label[b] = t;
    labelend[w] = labelend[b] = p;
    bestedge[w] = bestedge[b] = -1;
    if (t == 1) {
        leaves(b, queue);
    } else if (t == 2) {
        int base = blossombase[b];
        assign_label(endpoint[mate[base]], 1, mate[base] ^ 1);
    }
}

int Solver::scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
        int b = inblossom[v];
        if (label[b] & 4) {
            base = blossombase[b];
            break;
        }
        path.push_back(b);
        label[b] = 5;
        if (labelend[b] == -1) {
            v = -1;
        } else {
            v = endpoint[labelend[b]];
            b = inblossom[v];
            v = endpoint[labelend[b]];
        }
        if (w != -1) {
            std::swap(v, w);
        }
    }
    for (int b : path) {
        label[b] = 1;
    }
    return base;
}

void Solver::add_blossom(int base, int k) {
    int v = (int)edges[k].u;
    int w = (int)edges[k].v;
    int bb = inblossom[base];
    int bv = inblossom[v];
    int bw = inblossom[w];
    int b = unusedblossoms.back();
    unusedblossoms.pop_back();
    blossombase[b] = base;
    blossomparent[b] = -1;
    blossomparent[bb] = b;
    auto &path = blossomchilds[b];
    auto &endps = blossomendps[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        blossomparent[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend[bv]);
        v = endpoint[labelend[bv]];
        bv = inblossom[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        blossomparent[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend[bw] ^ 1);
        w = endpoint[labelend[bw]];
        bw = inblossom[w];
    }
    label[b] = 1;
    labelend[b] = labelend[bb];
    dualvar[b] = 0;
    for (int leaf : leaves(b)) {
        if (label[inblossom[leaf]] == 2) {
            queue.push_back(leaf);
        }
        inblossom[leaf] = b;
    }
    std::vector<int> bestedgeto(2 * nvertex, -1);
    for (int child : path) {
        std::vector<std::vector<int>> nblists;
        if (!has_bestedges[child]) {
            for (int leaf : leaves(child)) {
                std::vector<int> list;
                for (int p : neighbend[leaf]) {
                    list.push_back(p / 2);
                }
                nblists.push_back(std::move(list));
            }
        } else {
            nblists.push_back(blossombestedges[child]);
        }
        for (const auto &nblist : nblists) {
            for (int e : nblist) {
                int i = (int)edges[e].u;
                int j = (int)edges[e].v;
                if (inblossom[j] == b) {
                    std::swap(i, j);
                }
                int bj = inblossom[j];
                if (bj != b && label[bj] == 1 && (bestedgeto[bj] == -1 || slack(e) < slack(bestedgeto[bj]))) {
                    bestedgeto[bj] = e;
                }
            }
        }
        blossombestedges[child].clear();
        has_bestedges[child] = false;
        bestedge[child] = -1;
    }
    auto &best = blossombestedges[b];
    best.clear();
    for (int e : bestedgeto) {
        if (e != -1) {
            best.push_back(e);
        }
    }
    has_bestedges[b] = true;
    bestedge[b] = -1;
    for (int e : best) {
        if (bestedge[b] == -1 || slack(e) < slack(bestedge[b])) {
            bestedge[b] = e;
        }
    }
}

void Solver::expand_blossom(int b, bool endstage) {
    std::vector<int> childs = blossomchilds[b];
    for (int s : childs) {
        blossomparent[s] = -1;
        if (s < n()) {
            inblossom[s] = s;
        } else if (endstage && dualvar[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for (int leaf : leaves(s)) {
                inblossom[leaf] = s;
            }
        }
    }
    if (!endstage && label[b] == 2) {
        const auto &endps = blossomendps[b];
        size_t len = childs.size();
        int entrychild = inblossom[endpoint[labelend[b] ^ 1]];
        int j = (int)(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
        int jstep;
        int endptrick;
        if (j & 1) {
            j -= (int)len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        int p = labelend[b];
        while (j != 0) {
            label[endpoint[p ^ 1]] = 0;
            label[endpoint[endps[wrap(j - endptrick, len)] ^ endptrick ^ 1]] = 0;
            assign_label(endpoint[p ^ 1], 2, p);
            allowedge[endps[wrap(j - endptrick, len)] / 2] = 1;
            j += jstep;
            p = endps[wrap(j - endptrick, len)] ^ endptrick;
            allowedge[p / 2] = 1;
            j += jstep;
        }
        int bv = childs[wrap(j, len)];
        label[endpoint[p ^ 1]] = label[bv] = 2;
        labelend[endpoint[p ^ 1]] = labelend[bv] = p;
        bestedge[bv] = -1;
        j += jstep;
        while (childs[wrap(j, len)] != entrychild) {
            bv = childs[wrap(j, len)];
            if (label[bv] == 1) {
                j += jstep;
                continue;
            }
            auto lv = leaves(bv);
            int v = lv.back();
            for (int leaf : lv) {
                if (label[leaf] != 0) {
                    v = leaf;
                    break;
                }
            }
            if (label[v] != 0) {
                label[v] = 0;
                label[endpoint[mate[blossombase[bv]]]] = 0;
                assign_label(v, 2, labelend[v]);
            }
            j += jstep;
        }
    }
    label[b] = labelend[b] = -1;
    blossomchilds[b].clear();
    blossomendps[b].clear();
    blossombase[b] = -1;
    blossombestedges[b].clear();
    has_bestedges[b] = false;
    bestedge[b] = -1;
    unusedblossoms.push_back(b);
}

void Solver::augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent[t] != b) {
        t = blossomparent[t];
    }
    if (t >= n()) {
        augment_blossom(t, v);
    }
    auto &childs = blossomchilds[b];
    auto &endps = blossomendps[b];
    size_t len = childs.size();
    int i = (int)(std::find(childs.begin(), childs.end(), t) - childs.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
        j -= (int)len;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = childs[wrap(j, len)];
        int p = endps[wrap(j - endptrick, len)] ^ endptrick;
        if (t >= n()) {
            augment_blossom(t, endpoint[p]);
        }
        j += jstep;
        t = childs[wrap(j, len)];
        if (t >= n()) {
            augment_blossom(t, endpoint[p ^ 1]);
        }
        mate[endpoint[p]] = p ^ 1;
        mate[endpoint[p ^ 1]] = p;
    }
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase[b] = blossombase[childs[0]];
}

void Solver::augment_matching(int k) {
    int v = (int)edges[k].u;
    int w = (int)edges[k].v;
    for (auto [s, p] : {std::pair<int, int>{v, 2 * k + 1}, std::pair<int, int>{w, 2 * k}}) {
        while (true) {
            int bs = inblossom[s];
            if (bs >= n()) {
                augment_blossom(bs, s);
            }
            mate[s] = p;
            if (labelend[bs] == -1) {
                break;
            }
            int t = endpoint[labelend[bs]];
            int bt = inblossom[t];
            s = endpoint[labelend[bt]];
            int j = endpoint[labelend[bt] ^ 1];
            if (bt >= n()) {
                augment_blossom(bt, j);
            }
            mate[j] = labelend[bt];
            p = labelend[bt] ^ 1;
        }
    }
}

std::vector<int32_t> Solver::solve() {
    int nv = n();
    for (int stage = 0; stage < nv; stage++) {
        std::fill(label.begin(), label.end(), 0);
        std::fill(bestedge.begin(), bestedge.end(), -1);
        for (int b = nv; b < 2 * nv; b++) {
            blossombestedges[b].clear();
            has_bestedges[b] = false;
        }
        std::fill(allowedge.begin(), allowedge.end(), 0);
        queue.clear();
        for (int v = 0; v < nv; v++) {
            if (mate[v] == -1 && label[inblossom[v]] == 0) {
                assign_label(v, 1, -1);
            }
        }
        bool augmented = false;
        while (true) {
            while (!queue.empty() && !augmented) {
                int v = queue.back();
                queue.pop_back();
                for (int p : neighbend[v]) {
                    int k = p / 2;
                    int w = endpoint[p];
                    if (inblossom[v] == inblossom[w]) {
                        continue;
                    }
                    int64_t kslack = 0;
                    if (!allowedge[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) {
                            allowedge[k] = 1;
                        }
                    }
                    if (allowedge[k]) {
                        if (label[inblossom[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label[inblossom[w]] == 1) {
                            int base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label[w] == 0) {
                            label[w] = 2;
                            labelend[w] = p ^ 1;
                        }
                    } else if (label[inblossom[w]] == 1) {
                        int b = inblossom[v];
                        if (bestedge[b] == -1 || kslack < slack(bestedge[b])) {
                            bestedge[b] = k;
                        }
                    } else if (label[w] == 0) {
                        if (bestedge[w] == -1 || kslack < slack(bestedge[w])) {
                            bestedge[w] = k;
                        }
                    }
                }
            }
            if (augmented) {
                break;
            }

            int deltatype = -1;
            int64_t delta = 0;
            int deltaedge = -1;
            int deltablossom = -1;
            if (!max_cardinality) {
                deltatype = 1;
                delta = *std::min_element(dualvar.begin(), dualvar.begin() + nv);
            }
            for (int v = 0; v < nv; v++) {
                if (label[inblossom[v]] == 0 && bestedge[v] != -1) {
                    int64_t d = slack(bestedge[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge[v];
                    }
                }
            }
            for (int b = 0; b < 2 * nv; b++) {
                if (blossomparent[b] == -1 && label[b] == 1 && bestedge[b] != -1) {
                    int64_t kslack = slack(bestedge[b]);
                    if (kslack % 2 != 0) {
                        throw std::logic_error("max_weight_matching: odd slack");
                    }
                    int64_t d = kslack / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge[b];
                    }
                }
            }
            for (int b = nv; b < 2 * nv; b++) {
                if (blossombase[b] >= 0 && blossomparent[b] == -1 && label[b] == 2 &&
                    (deltatype == -1 || dualvar[b] < delta)) {
                    delta = dualvar[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                deltatype = 1;
                delta = std::max<int64_t>(0, *std::min_element(dualvar.begin(), dualvar.begin() + nv));
            }

            for (int v = 0; v < nv; v++) {
                if (label[inblossom[v]] == 1) {
                    dualvar[v] -= delta;
                } else if (label[inblossom[v]] == 2) {
                    dualvar[v] += delta;
                }
            }
            for (int b = nv; b < 2 * nv; b++) {
                if (blossombase[b] >= 0 && blossomparent[b] == -1) {
                    if (label[b] == 1) {
                        dualvar[b] += delta;
                    } else if (label[b] == 2) {
                        dualvar[b] -= delta;
                    }
                }
            }

            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge[deltaedge] = 1;
                int i = (int)edges[deltaedge].u;
                int j = (int)edges[deltaedge].v;
                if (label[inblossom[i]] == 0) {
                    std::swap(i, j);
                }
                queue.push_back(i);
            } else if (deltatype == 3) {
                allowedge[deltaedge] = 1;
                queue.push_back((int)edges[deltaedge].u);
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) {
            break;
        }
        for (int b = nv; b < 2 * nv; b++) {
            if (blossomparent[b] == -1 && blossombase[b] >= 0 && label[b] == 1 && dualvar[b] == 0) {
                expand_blossom(b, true);
            }
        }
    }
    std::vector<int32_t> result(nv, -1);
    for (int v = 0; v < nv; v++) {
        if (mate[v] >= 0) {
            result[v] = endpoint[mate[v]];
        }
    }
    return result;
}

}  // namespace

std::vector<int32_t> max_weight_matching(size_t num_vertices, std::span<const WeightedPair> edges,
                                         bool max_cardinality) {
    if (num_vertices == 0) {
        return {};
    }
    Solver solver(num_vertices, edges, max_cardinality);
    return solver.solve();
}

}  // namespace pipematch
