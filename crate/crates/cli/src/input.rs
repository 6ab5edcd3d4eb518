//! Resolving a graph from a file, the catalog or a generator spec.

use std::collections::BTreeMap;
use std::path::Path;

use balanced_core::generators::{
    gen_complete, gen_cycle, gen_erdos_renyi, gen_gaussian_clouds, gen_glued_paths, gen_grid, gen_path, gen_star,
    gen_swiss_roll, knn_graph, load_named, GluedPaths, PointCloud,
};
use balanced_core::io::{parse_edge_list, parse_points};
use balanced_core::Graph;

use crate::args::GraphSource;
use crate::CliError;

pub struct LoadedGraph {
    pub graph: Graph,
    pub label: String,
    pub cloud: Option<PointCloud>,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A parsed `name:key=value,...` generator spec.
pub struct GenSpec {
    pub name: String,
    params: BTreeMap<String, String>,
}

impl GenSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = BTreeMap::new();
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("generator parameter '{pair}' is not key=value")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(GenSpec {
            name: name.trim().to_string(),
            params,
        })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self
            .params
            .get(key)
            .ok_or_else(|| CliError::Usage(format!("generator '{}' needs {key}=...", self.name)))?;
        raw.parse()
            .map_err(|_| CliError::Usage(format!("generator parameter {key}='{raw}' is invalid")))
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        if self.params.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }
}

/// Parses `x,y;x,y` into cluster centers.
pub fn parse_centers(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .map(|c| {
            c.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Usage(format!("center coordinate '{x}' is not a number")))
                })
                .collect()
        })
        .collect()
}

/// Graph generators by spec. Point-cloud generators return the cloud.
pub enum Generated {
    Graph(Graph, Option<GluedPaths>),
    Cloud(PointCloud),
}

pub fn run_generator(spec: &GenSpec) -> Result<Generated, CliError> {
    let graph = |g: balanced_core::Result<Graph>| Ok(Generated::Graph(g?, None));
    match spec.name.as_str() {
        "path" => graph(gen_path(spec.get("n")?)),
        "cycle" => graph(gen_cycle(spec.get("n")?)),
        "complete" => graph(gen_complete(spec.get("n")?)),
        "star" => graph(gen_star(spec.get("leaves")?)),
        "grid" => graph(gen_grid(spec.get("rows")?, spec.get("cols")?)),
        "er" => graph(gen_erdos_renyi(spec.get("n")?, spec.get("p")?, spec.get_or("seed", 0)?)),
        "glued-paths" => {
            let gp = gen_glued_paths(spec.get("m")?, spec.get("ell")?)?;
            Ok(Generated::Graph(gp.graph.clone(), Some(gp)))
        }
        "gaussian" => {
            let centers = parse_centers(&spec.get::<String>("centers")?)?;
            let cloud = gen_gaussian_clouds(spec.get("n")?, &centers, spec.get_or("stddev", 1.0)?, spec.get_or("seed", 0)?)?;
            Ok(Generated::Cloud(cloud))
        }
        "swiss-roll" => Ok(Generated::Cloud(gen_swiss_roll(spec.get("n")?, spec.get_or("seed", 0)?)?)),
        other => Err(CliError::Usage(format!("unknown generator '{other}'"))),
    }
}

pub fn load_graph(source: &GraphSource) -> Result<LoadedGraph, CliError> {
    let knn = |cloud: PointCloud, label: String| -> Result<LoadedGraph, CliError> {
        let k = source
            .knn
            .ok_or_else(|| CliError::Usage("point-cloud input needs --knn".into()))?;
        Ok(LoadedGraph {
            graph: knn_graph(&cloud, k)?,
            label: format!("{label} knn={k}"),
            cloud: Some(cloud),
        })
    };
    if let Some(name) = &source.named {
        return Ok(LoadedGraph {
            graph: load_named(name)?,
            label: format!("named:{name}"),
            cloud: None,
        });
    }
    if let Some(text) = &source.gen {
        let spec = GenSpec::parse(text)?;
        return match run_generator(&spec)? {
            Generated::Graph(graph, _) => Ok(LoadedGraph {
                graph,
                label: format!("gen:{text}"),
                cloud: None,
            }),
            Generated::Cloud(cloud) => knn(cloud, format!("gen:{text}")),
        };
    }
    let path = source
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("no graph given: pass a file, --named or --gen".into()))?;
    let text = read_file(path)?;
    let label = path.display().to_string();
    if source.knn.is_some() {
        return knn(parse_points(&text)?, label);
    }
    Ok(LoadedGraph {
        graph: parse_edge_list(&text, source.vertices)?,
        label,
        cloud: None,
    })
}
