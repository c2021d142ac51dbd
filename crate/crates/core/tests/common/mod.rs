//! Fixtures, random instance generators and reference checks shared by the
//! integration tests and the acceptance runner.

#![allow(dead_code, clippy::needless_range_loop)]

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rma_core::kernels::{
    cholesky, determinant, eigen_sym, elementwise, inverse, product, qr, rank, solve, svd,
    transpose, Elementwise, Product,
};
use rma_core::rma::reduce;
use rma_core::{apply_rma, Column, Database, Kind, Matrix, OpCode, Relation, RmaCall, Value};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn weather() -> Relation {
    Relation::from_columns([
        ("T", Column::text(["5am", "8am", "7am", "6am"])),
        ("H", Column::int(vec![1, 8, 6, 1])),
        ("W", Column::int(vec![3, 5, 7, 4])),
    ])
    .unwrap()
    .named("r")
}

pub fn users() -> Relation {
    Relation::from_columns([
        ("User", Column::text(["Ann", "Tom", "Jan"])),
        ("State", Column::text(["CA", "FL", "CA"])),
        ("YoB", Column::int(vec![1980, 1965, 1970])),
    ])
    .unwrap()
}

pub fn films() -> Relation {
    Relation::from_columns([
        ("Title", Column::text(["Heat", "Balto", "Net"])),
        ("RelY", Column::int(vec![1995, 1995, 1995])),
        ("Director", Column::text(["Lee", "Lee", "Smith"])),
    ])
    .unwrap()
}

pub fn ratings() -> Relation {
    Relation::from_columns([
        ("User", Column::text(["Ann", "Tom", "Jan"])),
        ("Balto", Column::float(vec![2.0, 0.0, 1.0])),
        ("Heat", Column::float(vec![1.5, 0.0, 4.0])),
        ("Net", Column::float(vec![0.5, 1.5, 1.0])),
    ])
    .unwrap()
}

pub fn example_database() -> Database {
    let mut db = Database::new();
    db.insert("r", weather());
    db.insert("user", users());
    db.insert("film", films());
    db.insert("rating", ratings());
    db
}

/// The similarity workload: each step is stored as a table for the next.
pub const COVARIANCE_STEPS: &[(&str, &str)] = &[
    (
        "w1",
        "SELECT u.User AS U, Balto, Heat, Net FROM user u JOIN rating r ON u.User = r.User WHERE State = 'CA'",
    ),
    (
        "w2",
        "SELECT AVG(Balto) AS Balto, AVG(Heat) AS Heat, AVG(Net) AS Net FROM w1",
    ),
    (
        "w3",
        "SELECT U, Balto, Heat, Net FROM sub(w1 BY U, \
         (SELECT V, Balto, Heat, Net FROM (SELECT U AS V FROM w1) AS v CROSS JOIN w2) AS m BY V)",
    ),
    ("w4", "SELECT * FROM tra(w3 BY U)"),
    (
        "w7",
        "SELECT C, Balto/(M-1) AS Balto, Heat/(M-1) AS Heat, Net/(M-1) AS Net \
         FROM mmu(w4 BY C, w3 BY U) AS w5 CROSS JOIN (SELECT COUNT(*) AS M FROM w1) AS t",
    ),
    (
        "w8",
        "SELECT Title AS T, Balto, Heat, Net FROM w7 JOIN film ON C = Title WHERE Director = 'Lee'",
    ),
];

pub fn run_covariance(db: &mut Database) -> Result<(), rma_core::SqlError> {
    for (name, sql) in COVARIANCE_STEPS {
        let r = db.query(sql)?;
        db.insert(*name, r);
    }
    Ok(())
}

/// Reference queries that must parse and plan exactly as written.
pub const VERBATIM_QUERIES: [&str; 3] = [
    "SELECT * FROM inv(rating BY User);",
    "SELECT * FROM mmu(r BY U, s BY V);",
    "SELECT C, B/(M-1), H/(M-1), N/(M-1)\nFROM mmu(w4 BY C, w3 BY U) AS w5\n     cross join\n     ( SELECT COUNT(*) AS M FROM w1 ) AS t;",
];

/// The similarity workload with one-letter attribute names, which is how
/// the queries above refer to it.
pub fn abbreviated_workload() -> Database {
    let mut db = example_database();
    let steps = [
        ("w1", "SELECT u.User AS U, Balto AS B, Heat AS H, Net AS N FROM user u JOIN rating r ON u.User = r.User WHERE State = 'CA'"),
        ("w2", "SELECT AVG(B) AS B, AVG(H) AS H, AVG(N) AS N FROM w1"),
        ("w3", "SELECT U, B, H, N FROM sub(w1 BY U, (SELECT V, B, H, N FROM (SELECT U AS V FROM w1) AS v, w2) AS m BY V)"),
        ("w4", "SELECT * FROM tra(w3 BY U)"),
    ];
    for (n, q) in steps {
        let r = db.query(q).unwrap();
        db.insert(n, r);
    }
    db.insert(
        "s",
        Relation::from_columns([
            ("V", Column::text(["Balto", "Heat", "Net"])),
            ("x", Column::float(vec![1.0, 2.0, 3.0])),
        ])
        .unwrap(),
    );
    let r = db
        .query("SELECT User AS U, Balto, Heat, Net FROM rating")
        .unwrap();
    db.insert("r", r);
    db
}

/// Sample covariance of the columns of `rows` computed by deviations and a
/// plain triple loop.
pub fn covariance_oracle(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let k = rows[0].len();
    let mean: Vec<f64> = (0..k)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; k]; k];
    for (a, row) in cov.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let s: f64 = rows
                .iter()
                .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                .sum();
            *cell = s / (n as f64 - 1.0);
        }
    }
    cov
}

pub fn text(s: &str) -> Value {
    Value::Text(s.to_string())
}

pub fn float_of(v: &Value) -> f64 {
    v.as_f64().expect("numeric value")
}

fn cmp_tuple(a: &[Value], b: &[Value]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x.as_f64(), y.as_f64()) {
            (Some(p), Some(q)) => p.total_cmp(&q),
            _ => x.cmp_same_kind(y),
        })
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn sorted_rows(r: &Relation) -> Vec<Vec<Value>> {
    let mut rows: Vec<Vec<Value>> = r.rows().collect();
    rows.sort_by(|a, b| cmp_tuple(a, b));
    rows
}

fn values_close(a: &Value, b: &Value, tol: f64) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        _ => a == b,
    }
}

/// Set equality of tuples, numeric cells compared within `tol`, attribute
/// names ignored.
pub fn same_tuples(a: &Relation, b: &Relation, tol: f64) -> bool {
    if a.row_count() != b.row_count() || a.schema().len() != b.schema().len() {
        return false;
    }
    sorted_rows(a)
        .iter()
        .zip(sorted_rows(b).iter())
        .all(|(x, y)| x.iter().zip(y).all(|(p, q)| values_close(p, q, tol)))
}

/// Equal schemas and set-equal tuples.
pub fn set_equal(a: &Relation, b: &Relation, tol: f64) -> bool {
    a.schema() == b.schema() && same_tuples(a, b, tol)
}

// Random instances ----------------------------------------------------------

const ORDER_R: [&str; 2] = ["k0", "k1"];
const ORDER_S: [&str; 2] = ["b0", "b1"];

fn key_value(kind: Kind, d: u32) -> Value {
    match kind {
        Kind::Int64 => Value::Int(d as i64 - 5),
        Kind::Float64 => Value::Float(d as f64 * 0.5 - 2.0),
        Kind::Text => Value::Text(format!("v{d:02}")),
    }
}

fn random_kind(rng: &mut ChaCha8Rng) -> Kind {
    *[Kind::Int64, Kind::Float64, Kind::Text]
        .choose(rng)
        .unwrap()
}

/// `n` distinct key tuples over `arity` attributes, sorted ascending.
fn sorted_keys(rng: &mut ChaCha8Rng, n: usize, arity: usize) -> (Vec<Kind>, Vec<Vec<Value>>) {
    let kinds: Vec<Kind> = (0..arity).map(|_| random_kind(rng)).collect();
    let domain: Vec<u32> = if arity == 1 {
        (0..20).collect()
    } else {
        (0..100).collect()
    };
    let mut picked: Vec<u32> = domain.choose_multiple(rng, n).copied().collect();
    picked.sort_unstable();
    let mut keys: Vec<Vec<Value>> = picked
        .iter()
        .map(|&d| {
            if arity == 1 {
                vec![key_value(kinds[0], d)]
            } else {
                vec![key_value(kinds[0], d / 10), key_value(kinds[1], d % 10)]
            }
        })
        .collect();
    keys.sort_by(|a, b| cmp_tuple(a, b));
    (kinds, keys)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-10.0..=10.0)).collect())
        .collect()
}

fn symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut m = random_matrix(rng, n, n);
    for i in 0..n {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

fn spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let b = random_matrix(rng, n, n);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

/// Builds a relation whose rows, sorted by `order`, carry the rows of
/// `matrix`. Rows are shuffled and order attributes are placed at random
/// positions between the application attributes `a0, a1, ...`.
fn relation(
    rng: &mut ChaCha8Rng,
    order: &[&str],
    matrix: &[Vec<f64>],
    allow_int: bool,
) -> Relation {
    let n = matrix.len();
    let k = matrix[0].len();
    let (kinds, keys) = sorted_keys(rng, n, order.len());
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);

    let mut cols: Vec<(String, Column)> = Vec::new();
    for j in 0..k {
        let integral = allow_int && rng.gen_bool(0.25);
        let col = if integral {
            Column::int(perm.iter().map(|&i| matrix[i][j].round() as i64).collect())
        } else {
            Column::float(perm.iter().map(|&i| matrix[i][j]).collect())
        };
        cols.push((format!("a{j}"), col));
    }
    for (p, name) in order.iter().enumerate() {
        let values: Vec<Value> = perm.iter().map(|&i| keys[i][p].clone()).collect();
        let col = Column::from_values(kinds[p], &values);
        let at = rng.gen_range(0..=cols.len());
        cols.insert(at, (name.to_string(), col));
    }
    Relation::from_columns(cols).unwrap()
}

fn order_arity(rng: &mut ChaCha8Rng, op: OpCode, first: bool) -> usize {
    let single = match op {
        OpCode::Tra | OpCode::Usv => first,
        OpCode::Opd => !first,
        _ => false,
    };
    if single {
        1
    } else {
        rng.gen_range(1..=2)
    }
}

/// One random valid call of `op` with at most 8 rows and 4 application
/// attributes. Inputs the kernel rejects (singular, rank deficient) are
/// redrawn.
pub fn random_call(op: OpCode, rng: &mut ChaCha8Rng) -> RmaCall {
    loop {
        let call = draw(op, rng);
        if apply_rma(&call).is_ok() {
            return call;
        }
    }
}

fn draw(op: OpCode, rng: &mut ChaCha8Rng) -> RmaCall {
    let ua = order_arity(rng, op, true);
    let va = order_arity(rng, op, false);
    let u = &ORDER_R[..ua];
    let v = &ORDER_S[..va];
    let k = rng.gen_range(1..=4);
    let tall = rng.gen_range(k..=8);
    let any_rows = rng.gen_range(1..=8);
    let (a, allow_int): (Vec<Vec<f64>>, bool) = match op {
        OpCode::Inv | OpCode::Det | OpCode::Sol => (random_matrix(rng, k, k), true),
        OpCode::Evc | OpCode::Evl => (symmetric(rng, k), false),
        OpCode::Chf => (spd(rng, k), false),
        OpCode::Qqr | OpCode::Rqr | OpCode::Dsv | OpCode::Usv | OpCode::Vsv => {
            (random_matrix(rng, tall, k), true)
        }
        _ => (random_matrix(rng, any_rows, k), true),
    };
    let r = relation(rng, u, &a, allow_int).named("r");
    let (n, k) = (a.len(), a[0].len());
    let second = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
        let m = random_matrix(rng, rows, cols);
        relation(rng, v, &m, true).named("s")
    };
    let m = rng.gen_range(1..=4);
    let s = match op {
        OpCode::Mmu => Some(second(rng, k, m)),
        OpCode::Cpd | OpCode::Sol => Some(second(rng, n, m)),
        OpCode::Opd => Some(second(rng, m, k)),
        OpCode::Add | OpCode::Sub | OpCode::Emu => Some(second(rng, n, k)),
        _ => None,
    };
    match s {
        Some(s) => RmaCall::binary(op, r, u.iter().copied(), s, v.iter().copied()),
        None => RmaCall::unary(op, r, u.iter().copied()),
    }
}

/// The matrix operation alone, applied to plain matrices.
pub fn kernel(op: OpCode, a: &Matrix, b: Option<&Matrix>) -> Matrix {
    let b = || b.unwrap();
    let k = match op {
        OpCode::Emu => elementwise(Elementwise::Emu, a, b()),
        OpCode::Add => elementwise(Elementwise::Add, a, b()),
        OpCode::Sub => elementwise(Elementwise::Sub, a, b()),
        OpCode::Mmu => product(Product::Mmu, a, b()),
        OpCode::Cpd => product(Product::Cpd, a, b()),
        OpCode::Opd => product(Product::Opd, a, b()),
        OpCode::Sol => solve(a, b()),
        OpCode::Tra => Ok(transpose(a)),
        OpCode::Inv => inverse(a),
        OpCode::Evc => eigen_sym(a).map(|e| e.vectors),
        OpCode::Evl => eigen_sym(a).map(|e| e.values),
        OpCode::Qqr => qr(a).map(|f| f.q),
        OpCode::Rqr => qr(a).map(|f| f.r),
        OpCode::Dsv => svd(a).map(|f| f.d),
        OpCode::Usv => svd(a).map(|f| f.u),
        OpCode::Vsv => svd(a).map(|f| f.v),
        OpCode::Det => determinant(a).map(|d| Matrix::new(1, 1, vec![d]).unwrap()),
        OpCode::Rnk => rank(a).map(|r| Matrix::new(1, 1, vec![r as f64]).unwrap()),
        OpCode::Chf => cholesky(a),
    };
    k.expect("generated inputs satisfy the kernel preconditions")
}

fn app_names(r: &Relation, order: &[String]) -> Vec<String> {
    r.schema()
        .names()
        .filter(|n| !order.iter().any(|o| o == n))
        .map(str::to_string)
        .collect()
}

fn order_tuples(r: &Relation, order: &[String]) -> Vec<Vec<Value>> {
    let idx: Vec<usize> = order
        .iter()
        .map(|o| r.schema().index_of(o).unwrap())
        .collect();
    let mut t: Vec<Vec<Value>> = r
        .rows()
        .map(|row| idx.iter().map(|&i| row[i].clone()).collect())
        .collect();
    t.sort_by(|a, b| cmp_tuple(a, b));
    t
}

fn cast(r: &Relation, attr: &str) -> Vec<String> {
    order_tuples(r, &[attr.to_string()])
        .into_iter()
        .map(|t| t[0].to_string())
        .collect()
}

fn as_tuples(names: &[String]) -> Vec<Vec<Value>> {
    names.iter().map(|n| vec![text(n)]).collect()
}

/// Expected row origins, column origins and leading attributes of the
/// result, written out per shape type from the definition of origins.
pub struct ExpectedOrigins {
    pub leading: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub columns: Vec<String>,
}

pub fn expected_origins(call: &RmaCall) -> ExpectedOrigins {
    use OpCode::*;
    let r = &call.first.relation;
    let u = &call.first.order;
    let s = call.second.as_ref().map(|a| &a.relation);
    let v = call.second.as_ref().map(|a| &a.order);
    let ctx = vec![call.context.clone()];
    let r_app = app_names(r, u);
    let s_app = || app_names(s.unwrap(), v.unwrap());
    let (leading, rows) = match call.op {
        // rows of r
        Inv | Evc | Chf | Qqr | Mmu | Evl | Usv | Opd => (u.clone(), order_tuples(r, u)),
        // application attributes of r become rows
        Tra | Rqr | Dsv | Vsv | Cpd | Sol => (ctx, as_tuples(&r_app)),
        Add | Sub | Emu => {
            let mut lead = u.clone();
            lead.extend(v.unwrap().iter().cloned());
            let mut rows: Vec<Vec<Value>> = order_tuples(r, u)
                .into_iter()
                .zip(order_tuples(s.unwrap(), v.unwrap()))
                .map(|(mut a, b)| {
                    a.extend(b);
                    a
                })
                .collect();
            rows.sort_by(|a, b| cmp_tuple(a, b));
            (lead, rows)
        }
        Det | Rnk => (ctx, vec![vec![text(r.name().unwrap())]]),
    };
    let columns = match call.op {
        Usv | Tra => cast(r, &u[0]),
        Opd => cast(s.unwrap(), &v.unwrap()[0]),
        Inv | Evc | Chf | Qqr | Rqr | Dsv | Vsv | Add | Sub | Emu => r_app,
        Mmu | Cpd | Sol => s_app(),
        Evl | Det | Rnk => vec![call.op.name().to_string()],
    };
    ExpectedOrigins {
        leading,
        rows,
        columns,
    }
}

/// Checks matrix consistency and origins of one call.
pub fn check_matrix_consistency(call: &RmaCall) -> Result<(), String> {
    let out = apply_rma(call).map_err(|e| format!("{}: {e}", call.op))?;
    let exp = expected_origins(call);

    let a = reduce(&call.first.relation, &call.first.order).map_err(|e| e.to_string())?;
    let b = call
        .second
        .as_ref()
        .map(|s| reduce(&s.relation, &s.order))
        .transpose()
        .map_err(|e| e.to_string())?;
    let want = kernel(call.op, &a, b.as_ref());
    let got =
        reduce(&out, &exp.leading).map_err(|e| format!("{}: reduce of result: {e}", call.op))?;
    if got.shape() != want.shape() {
        return Err(format!(
            "{}: shape {:?} vs kernel {:?}",
            call.op,
            got.shape(),
            want.shape()
        ));
    }
    let diff = got.max_abs_diff(&want);
    if diff > 1e-9 {
        return Err(format!(
            "{}: result deviates from kernel by {diff:e}",
            call.op
        ));
    }

    let names: Vec<String> = out.schema().names().map(str::to_string).collect();
    let mut schema_want = exp.leading.clone();
    schema_want.extend(exp.columns.iter().cloned());
    if names != schema_want {
        return Err(format!(
            "{}: schema {names:?}, expected {schema_want:?}",
            call.op
        ));
    }
    let rows = order_tuples(&out, &exp.leading);
    if rows != exp.rows {
        return Err(format!(
            "{}: row origins {rows:?}, expected {:?}",
            call.op, exp.rows
        ));
    }
    Ok(())
}

// Kernel oracles --------------------------------------------------------------

pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * cofactor_det(&minor)
        })
        .sum()
}

pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    product(Product::Mmu, a, b).unwrap()
}

pub fn random_square(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_rows(&random_matrix(rng, n, n)).unwrap()
}

/// A random square matrix with infinity-norm condition number at most 1e3.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let a = random_square(rng, n);
        if let Ok(inv) = inverse(&a) {
            if a.inf_norm() * inv.inf_norm() <= 1e3 {
                return a;
            }
        }
    }
}

pub fn random_tall(rng: &mut ChaCha8Rng) -> Matrix {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(n..=8);
    Matrix::from_rows(&random_matrix(rng, m, n)).unwrap()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_rows(&symmetric(rng, n)).unwrap()
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_rows(&spd(rng, n)).unwrap()
}

/// A random `m x n` matrix of rank exactly `k`, built as a product of an
/// `m x k` and a `k x n` factor with small integer entries.
pub fn rank_k(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize) -> Matrix {
    loop {
        let left = Matrix::from_rows(
            &(0..m)
                .map(|_| (0..k).map(|_| rng.gen_range(-3..=3) as f64).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let right = Matrix::from_rows(
            &(0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        // integer factors: the product has rank k iff some k x k minor is nonzero
        let p = mul(&left, &right);
        if exact_rank(&p.to_rows()) == k {
            return p;
        }
    }
}

/// Rank by fraction-free elimination on integer-valued matrices.
pub fn exact_rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|v| *v as i128).collect())
        .collect();
    let (h, w) = (m.len(), m[0].len());
    let mut rank = 0;
    for c in 0..w {
        let Some(p) = (rank..h).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for i in 0..h {
            if i != rank && m[i][c] != 0 {
                let (a, b) = (m[rank][c], m[i][c]);
                for j in 0..w {
                    m[i][j] = m[i][j] * a - m[rank][j] * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn kernel_oracle_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(1..=4);
    let a = well_conditioned(rng, n);
    let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(what.to_string()) };

    let gj = inverse(&a).map_err(|e| e.to_string())?;
    let lu = rma_core::kernels::lu_inverse(&a).map_err(|e| e.to_string())?;
    check(gj.max_abs_diff(&lu) <= 1e-9, "Gauss-Jordan vs LU inverse")?;
    check(
        mul(&a, &gj).max_abs_diff(&Matrix::identity(n)) <= 1e-8,
        "A * inv(A) = I",
    )?;

    let t = random_tall(rng);
    let f = qr(&t).map_err(|e| e.to_string())?;
    check(
        mul(&f.q, &f.r).max_abs_diff(&t) <= 1e-9,
        "QR reconstruction",
    )?;
    let qtq = product(Product::Cpd, &f.q, &f.q).unwrap();
    check(
        qtq.max_abs_diff(&Matrix::identity(t.cols())) <= 1e-9,
        "Q orthonormal",
    )?;

    let s = svd(&t).map_err(|e| e.to_string())?;
    let sv = s.singular_values();
    check(
        sv.windows(2).all(|w| w[0] >= w[1]) && sv.iter().all(|x| *x >= 0.0),
        "singular values descending",
    )?;
    let (m, k) = t.shape();
    let mut padded = vec![vec![0.0; k]; m];
    for (i, row) in padded.iter_mut().enumerate().take(k) {
        row[i] = sv[i];
    }
    let us = mul(&s.u, &Matrix::from_rows(&padded).unwrap());
    let rec = product(Product::Opd, &us, &s.v).unwrap();
    check(rec.max_abs_diff(&t) <= 1e-8, "SVD reconstruction")?;

    let sym = random_symmetric(rng, n);
    let e = eigen_sym(&sym).map_err(|e| e.to_string())?;
    for j in 0..n {
        let vj = Matrix::from_columns(vec![e.vectors.column(j).to_vec()]).unwrap();
        let av = mul(&sym, &vj);
        let lam = e.values.get(j, 0);
        let resid = (0..n)
            .map(|i| (av.get(i, 0) - lam * vj.get(i, 0)).abs())
            .fold(0.0, f64::max);
        check(resid <= 1e-8, "eigen residual")?;
    }
    let trace: f64 = (0..n).map(|i| sym.get(i, i)).sum();
    let sum: f64 = (0..n).map(|i| e.values.get(i, 0)).sum();
    check(
        (trace - sum).abs() <= 1e-8,
        "sum of eigenvalues equals trace",
    )?;

    let p = random_spd(rng, n);
    let u = cholesky(&p).map_err(|e| e.to_string())?;
    let utu = product(Product::Cpd, &u, &u).unwrap();
    check(utu.max_abs_diff(&p) <= 1e-9, "Cholesky u'u = a")?;

    let d = determinant(&a).map_err(|e| e.to_string())?;
    let oracle = cofactor_det(&a.to_rows());
    check(
        (d - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
        "determinant vs cofactor expansion",
    )?;

    let kk = rng.gen_range(1..=4);
    let rows = rng.gen_range(kk..=6);
    let cols = rng.gen_range(kk..=6);
    let low = rank_k(rng, rows, cols, kk);
    let got = rank(&low).map_err(|e| e.to_string())?;
    check(
        got == kk,
        &format!("rank {got} of constructed rank-{kk} matrix"),
    )?;
    Ok(())
}

// Sort avoidance -------------------------------------------------------------

pub const SORT_AVOIDING: [OpCode; 4] = [OpCode::Qqr, OpCode::Add, OpCode::Sub, OpCode::Emu];

/// Runs one random call with and without sort avoidance and compares the
/// results as sets (numeric cells within 1e-9).
pub fn sort_avoidance_case(op: OpCode, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let call = random_call(op, rng);
    let naive = apply_rma(&call.clone().with_sort_avoidance(false)).map_err(|e| e.to_string())?;
    let fast = apply_rma(&call.with_sort_avoidance(true)).map_err(|e| e.to_string())?;
    if set_equal(&naive, &fast, 1e-9) {
        Ok(())
    } else {
        Err(format!("{op}: optimized and naive results differ"))
    }
}

/// A relation with `rows` rows, eight distinct-valued order attributes and
/// two application attributes.
pub fn wide_key_relation(rows: usize, rng: &mut ChaCha8Rng) -> Relation {
    let mut cols: Vec<(String, Column)> = (0..8)
        .map(|j| {
            let vals: Vec<i64> = (0..rows as i64)
                .map(|i| (i * 7 + j) % (rows as i64 + 3) + j * 1000)
                .collect();
            (format!("o{j}"), Column::int(vals))
        })
        .collect();
    for j in 0..2 {
        cols.push((
            format!("x{j}"),
            Column::float((0..rows).map(|_| rng.gen_range(-10.0..=10.0)).collect()),
        ));
    }
    Relation::from_columns(cols).unwrap()
}

/// Sort operations counted while running qqr over `r` keyed by its eight
/// order attributes.
pub fn qqr_sorts(r: &Relation, avoid: bool) -> Result<(u64, Relation), String> {
    let order: Vec<String> = (0..8).map(|j| format!("o{j}")).collect();
    let before = rma_core::columnar::sort_operations();
    let out = apply_rma(&RmaCall::unary(OpCode::Qqr, r.clone(), order).with_sort_avoidance(avoid))
        .map_err(|e| e.to_string())?;
    Ok((rma_core::columnar::sort_operations() - before, out))
}
