//! Graph ingestion and serialization.
//!
//! Two formats are supported: whitespace-separated text edge lists (with
//! `#` comment lines) and a little-endian binary CSR container:
//!
//! ```text
//! magic "HYTG" | version u32 | flags u32 | num_vertices u64 | num_edges u64
//! offsets  u64 x (num_vertices + 1)
//! neighbors u32 x num_edges          (u64 when flag bit1 is set)
//! weights  u32 x num_edges           (present when flag bit0 is set)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::CsrGraph;

pub const CSR_MAGIC: [u8; 4] = *b"HYTG";
pub const CSR_VERSION: u32 = 1;
const FLAG_WEIGHTED: u32 = 1 << 0;
const FLAG_WIDE_IDS: u32 = 1 << 1;

/// A loaded graph plus the map from dense ids back to the original ids.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: CsrGraph,
    /// `id_map[dense] = original`; identity when the input had no gaps.
    pub id_map: Vec<u64>,
}

/// Parse a text edge list. Original ids may be sparse; they are compacted
/// to dense ids in ascending original-id order. Undirected inputs store
/// each edge in both directions.
pub fn load_edge_list(path: &Path, directed: bool, weighted: bool) -> Result<LoadedGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    let mut raw_weights: Vec<u32> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_field = |tok: Option<&str>, what: &str| -> Result<u64> {
            let tok = tok.ok_or_else(|| Error::Parse {
                path: path.into(),
                line: lineno,
                msg: format!("missing {what}"),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                path: path.into(),
                line: lineno,
                msg: format!("invalid {what} '{tok}'"),
            })
        };
        let src = parse_field(fields.next(), "source id")?;
        let dst = parse_field(fields.next(), "destination id")?;
        let w = if weighted {
            let w = parse_field(fields.next(), "edge weight")?;
            u32::try_from(w).map_err(|_| Error::Parse {
                path: path.into(),
                line: lineno,
                msg: format!("weight {w} exceeds 32 bits"),
            })?
        } else {
            0
        };
        if fields.next().is_some() {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno,
                msg: format!("expected {} fields", if weighted { 3 } else { 2 }),
            });
        }
        raw_edges.push((src, dst));
        if weighted {
            raw_weights.push(w);
        }
    }

    // Compact gaps: dense ids follow ascending original-id order.
    let mut ids: Vec<u64> = raw_edges.iter().flat_map(|&(s, d)| [s, d]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > u32::MAX as usize {
        return Err(Error::IdOverflow(format!(
            "{} distinct vertices exceed the 32-bit id space",
            ids.len()
        )));
    }
    let dense = |orig: u64| ids.binary_search(&orig).expect("id present") as u32;

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(raw_edges.len() * if directed { 1 } else { 2 });
    let mut weights: Vec<u32> = Vec::new();
    for (i, &(s, d)) in raw_edges.iter().enumerate() {
        let (s, d) = (dense(s), dense(d));
        edges.push((s, d));
        if weighted {
            weights.push(raw_weights[i]);
        }
        if !directed {
            edges.push((d, s));
            if weighted {
                weights.push(raw_weights[i]);
            }
        }
    }
    let graph = CsrGraph::from_edges(
        ids.len() as u32,
        &edges,
        if weighted { Some(&weights) } else { None },
    )?;
    Ok(LoadedGraph { graph, id_map: ids })
}

/// Serialize a graph to the binary CSR container.
pub fn write_binary_csr(g: &CsrGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path, e);

    w.write_all(&CSR_MAGIC).map_err(io_err)?;
    w.write_all(&CSR_VERSION.to_le_bytes()).map_err(io_err)?;
    let flags = if g.is_weighted() { FLAG_WEIGHTED } else { 0 };
    w.write_all(&flags.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(g.num_vertices() as u64).to_le_bytes()).map_err(io_err)?;
    w.write_all(&g.num_edges().to_le_bytes()).map_err(io_err)?;
    for &o in g.offsets() {
        w.write_all(&o.to_le_bytes()).map_err(io_err)?;
    }
    for &nb in g.neighbor_slice() {
        w.write_all(&nb.to_le_bytes()).map_err(io_err)?;
    }
    if let Some(ws) = g.weights() {
        for &x in ws {
            w.write_all(&x.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Read a graph from the binary CSR container.
pub fn read_binary_csr(path: &Path) -> Result<CsrGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let fmt = |msg: &str| Error::Format { path: path.into(), msg: msg.into() };

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path)?;
    if magic != CSR_MAGIC {
        return Err(fmt("bad magic"));
    }
    let version = read_u32(&mut r, path)?;
    if version != CSR_VERSION {
        return Err(fmt(&format!("unsupported format version {version}")));
    }
    let flags = read_u32(&mut r, path)?;
    if flags & !(FLAG_WEIGHTED | FLAG_WIDE_IDS) != 0 {
        return Err(fmt(&format!("unknown flag bits {flags:#x}")));
    }
    let num_vertices = read_u64(&mut r, path)?;
    let num_edges = read_u64(&mut r, path)?;
    if num_vertices > u32::MAX as u64 {
        return Err(Error::IdOverflow(format!(
            "{num_vertices} vertices exceed the 32-bit id space"
        )));
    }

    let mut offsets = Vec::with_capacity(num_vertices as usize + 1);
    for _ in 0..=num_vertices {
        offsets.push(read_u64(&mut r, path)?);
    }
    let mut neighbors = Vec::with_capacity(num_edges as usize);
    if flags & FLAG_WIDE_IDS != 0 {
        for _ in 0..num_edges {
            let id = read_u64(&mut r, path)?;
            let id = u32::try_from(id)
                .map_err(|_| Error::IdOverflow(format!("neighbor id {id} exceeds 32 bits")))?;
            neighbors.push(id);
        }
    } else {
        for _ in 0..num_edges {
            neighbors.push(read_u32(&mut r, path)?);
        }
    }
    let weights = if flags & FLAG_WEIGHTED != 0 {
        let mut ws = Vec::with_capacity(num_edges as usize);
        for _ in 0..num_edges {
            ws.push(read_u32(&mut r, path)?);
        }
        Some(ws)
    } else {
        None
    };
    let mut trailer = [0u8; 1];
    match r.read(&mut trailer) {
        Ok(0) => {}
        Ok(_) => return Err(fmt("trailing bytes after graph data")),
        Err(e) => return Err(Error::io(path, e)),
    }
    CsrGraph::from_parts(offsets, neighbors, weights)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format { path: path.into(), msg: "truncated file".into() }
        } else {
            Error::io(path, e)
        }
    })
}

fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R, path: &Path) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(u64::from_le_bytes(b))
}

/// Write a raw little-endian `u32` array (permutation sidecars).
pub fn write_u32_array(path: &Path, data: &[u32]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for &x in data {
        w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_u32_array(path: &Path) -> Result<Vec<u32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Format { path: path.into(), msg: "length not a multiple of 4".into() });
    }
    Ok(bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Write a raw little-endian `u64` array (id-map sidecars, result arrays).
pub fn write_u64_array(path: &Path, data: &[u64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for &x in data {
        w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a raw little-endian `f64` array (rank result arrays).
pub fn write_f64_array(path: &Path, data: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for &x in data {
        w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write an edge list as text, one `src dst [w]` line per edge.
pub fn write_edge_list(path: &Path, edges: &[(u32, u32)], weights: Option<&[u32]>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let io_err = |e: std::io::Error| Error::io(path, e);
    for (i, &(s, d)) in edges.iter().enumerate() {
        match weights {
            Some(ws) => writeln!(w, "{s} {d} {}", ws[i]).map_err(io_err)?,
            None => writeln!(w, "{s} {d}").map_err(io_err)?,
        }
    }
    w.flush().map_err(io_err)
}
