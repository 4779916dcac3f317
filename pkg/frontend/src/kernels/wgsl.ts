/**
 * WGSL sources for the three device kernels. Each factory takes the
 * workgroup size (a power of two) and returns the shader text; the split
 * helpers are spliced into every kernel so device arithmetic matches the CPU
 * model in f32x2.ts formula for formula.
 *
 * Coordinates bind as interleaved (hi, lo) f32 pairs, one vec2f per value.
 * Kernels only ever emit per-workgroup partials; all merging across
 * workgroups happens on the host, in workgroup-index order for sums and by
 * the lexicographic rule for the max pair.
 */

/** Shared split-float helpers (mirror f32x2.ts exactly). */
const DF_PRELUDE = `
fn two_sum(a: f32, b: f32) -> vec2f {
  let s = a + b;
  let bv = s - a;
  let av = s - bv;
  return vec2f(s, (a - av) + (b - bv));
}

fn fast_two_sum(a: f32, b: f32) -> vec2f {
  let s = a + b;
  return vec2f(s, b - (s - a));
}

fn df_add(x: vec2f, y: vec2f) -> vec2f {
  let s = two_sum(x.x, y.x);
  let t = s.y + (x.y + y.y);
  return fast_two_sum(s.x, t);
}

fn df_sub(x: vec2f, y: vec2f) -> vec2f {
  return df_add(x, vec2f(-y.x, -y.y));
}

fn vsplit(a: f32) -> vec2f {
  let c = a * 4097.0;
  let hi = c - (c - a);
  return vec2f(hi, a - hi);
}

fn two_prod(a: f32, b: f32) -> vec2f {
  let p = a * b;
  let ah = vsplit(a);
  let bh = vsplit(b);
  var err = ((ah.x * bh.x - p) + ah.x * bh.y) + ah.y * bh.x;
  err = err + ah.y * bh.y;
  return vec2f(p, err);
}

fn df_sqr(v: vec2f) -> vec2f {
  let p = two_prod(v.x, v.x);
  let cross = 2.0 * v.x * v.y + v.y * v.y;
  return fast_two_sum(p.x, p.y + cross);
}

fn df_less(a: vec2f, b: vec2f) -> bool {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}
`;

/**
 * Max-pair-distance kernel. One invocation scans one row i of the job's row
 * set against every j > i; the workgroup tree-reduces by (d2 desc, i asc,
 * j asc) and emits a single partial. Out-of-range invocations carry the
 * d2 = -1 sentinel, which any real pair beats.
 */
export function maxPairShader(workgroupSize: number): string {
  return `${DF_PRELUDE}
struct Params { n: u32, m: u32, row_count: u32 }
struct PairPartial { d2: vec2f, i: u32, j: u32 }

@group(0) @binding(0) var<storage, read> coords: array<vec2f>;
@group(0) @binding(1) var<storage, read> rows: array<u32>;
@group(0) @binding(2) var<uniform> params: Params;
@group(0) @binding(3) var<storage, read_write> partials: array<PairPartial>;

var<workgroup> s_d2: array<vec2f, ${workgroupSize}>;
var<workgroup> s_i: array<u32, ${workgroupSize}>;
var<workgroup> s_j: array<u32, ${workgroupSize}>;

fn row_dist2(i: u32, j: u32) -> vec2f {
  var acc = vec2f(0.0, 0.0);
  for (var f = 0u; f < params.m; f++) {
    let d = df_sub(coords[i * params.m + f], coords[j * params.m + f]);
    acc = df_add(acc, df_sqr(d));
  }
  return acc;
}

@compute @workgroup_size(${workgroupSize}, 1, 1)
fn main(
  @builtin(local_invocation_id) local_id: vec3<u32>,
  @builtin(workgroup_id) group_id: vec3<u32>,
) {
  let t = local_id.x;
  let g = group_id.x * ${workgroupSize}u + t;

  var best_d2 = vec2f(-1.0, 0.0);
  var best_i = 0u;
  var best_j = 0u;
  if (g < params.row_count) {
    let i = rows[g];
    best_i = i;
    for (var j = i + 1u; j < params.n; j++) {
      let d2 = row_dist2(i, j);
      if (df_less(best_d2, d2)) {
        best_d2 = d2;
        best_j = j;
      }
    }
  }
  s_d2[t] = best_d2;
  s_i[t] = best_i;
  s_j[t] = best_j;

  for (var off = ${workgroupSize}u / 2u; off > 0u; off >>= 1u) {
    workgroupBarrier();
    if (t < off) {
      let take = df_less(s_d2[t], s_d2[t + off]) ||
        (!df_less(s_d2[t + off], s_d2[t]) &&
          (s_i[t + off] < s_i[t] ||
            (s_i[t + off] == s_i[t] && s_j[t + off] < s_j[t])));
      if (take) {
        s_d2[t] = s_d2[t + off];
        s_i[t] = s_i[t + off];
        s_j[t] = s_j[t + off];
      }
    }
  }
  if (t == 0u) {
    partials[group_id.x] = PairPartial(s_d2[0], s_i[0], s_j[0]);
  }
}
`;
}

/**
 * Coordinate-sum kernel over rows [start, start + count). One feature at a
 * time: leaves go to shared memory, a binary tree folds them, thread 0 emits
 * the workgroup partial for that feature.
 */
export function sumShader(workgroupSize: number): string {
  return `${DF_PRELUDE}
struct Params { start: u32, count: u32, m: u32 }

@group(0) @binding(0) var<storage, read> coords: array<vec2f>;
@group(0) @binding(1) var<uniform> params: Params;
@group(0) @binding(2) var<storage, read_write> partials: array<vec2f>;

var<workgroup> s_acc: array<vec2f, ${workgroupSize}>;

@compute @workgroup_size(${workgroupSize}, 1, 1)
fn main(
  @builtin(local_invocation_id) local_id: vec3<u32>,
  @builtin(workgroup_id) group_id: vec3<u32>,
) {
  let t = local_id.x;
  let g = group_id.x * ${workgroupSize}u + t;

  for (var f = 0u; f < params.m; f++) {
    var leaf = vec2f(0.0, 0.0);
    if (g < params.count) {
      leaf = coords[(params.start + g) * params.m + f];
    }
    s_acc[t] = leaf;
    for (var off = ${workgroupSize}u / 2u; off > 0u; off >>= 1u) {
      workgroupBarrier();
      if (t < off) {
        s_acc[t] = df_add(s_acc[t], s_acc[t + off]);
      }
    }
    if (t == 0u) {
      partials[group_id.x * params.m + f] = s_acc[0];
    }
    workgroupBarrier();
  }
}
`;
}

/**
 * Cluster-sum kernel: per-cluster bins in workgroup memory, filled by masked
 * tree reductions (one per cluster and feature, plus one per cluster for the
 * counts). A label outside [0, k) raises the job-level flag and contributes
 * to no bin.
 */
export function clusterSumShader(workgroupSize: number): string {
  return `${DF_PRELUDE}
struct Params { start: u32, count: u32, m: u32, k: u32 }

@group(0) @binding(0) var<storage, read> coords: array<vec2f>;
@group(0) @binding(1) var<storage, read> labels: array<u32>;
@group(0) @binding(2) var<uniform> params: Params;
@group(0) @binding(3) var<storage, read_write> sums: array<vec2f>;
@group(0) @binding(4) var<storage, read_write> counts: array<u32>;
@group(0) @binding(5) var<storage, read_write> bad_flag: atomic<u32>;

var<workgroup> s_acc: array<vec2f, ${workgroupSize}>;
var<workgroup> s_cnt: array<u32, ${workgroupSize}>;

@compute @workgroup_size(${workgroupSize}, 1, 1)
fn main(
  @builtin(local_invocation_id) local_id: vec3<u32>,
  @builtin(workgroup_id) group_id: vec3<u32>,
) {
  let t = local_id.x;
  let g = group_id.x * ${workgroupSize}u + t;

  var label = 0u;
  var live = false;
  if (g < params.count) {
    label = labels[params.start + g];
    if (label >= params.k) {
      atomicStore(&bad_flag, 1u);
    } else {
      live = true;
    }
  }

  for (var c = 0u; c < params.k; c++) {
    let mine = live && label == c;
    for (var f = 0u; f < params.m; f++) {
      var leaf = vec2f(0.0, 0.0);
      if (mine) {
        leaf = coords[(params.start + g) * params.m + f];
      }
      s_acc[t] = leaf;
      for (var off = ${workgroupSize}u / 2u; off > 0u; off >>= 1u) {
        workgroupBarrier();
        if (t < off) {
          s_acc[t] = df_add(s_acc[t], s_acc[t + off]);
        }
      }
      if (t == 0u) {
        sums[(group_id.x * params.k + c) * params.m + f] = s_acc[0];
      }
      workgroupBarrier();
    }

    s_cnt[t] = select(0u, 1u, mine);
    for (var off = ${workgroupSize}u / 2u; off > 0u; off >>= 1u) {
      workgroupBarrier();
      if (t < off) {
        s_cnt[t] = s_cnt[t] + s_cnt[t + off];
      }
    }
    if (t == 0u) {
      counts[group_id.x * params.k + c] = s_cnt[0];
    }
    workgroupBarrier();
  }
}
`;
}
