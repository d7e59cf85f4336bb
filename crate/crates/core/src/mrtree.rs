//! Tree-structured annealing over multi-resolution inputs.
//!
//! The root learns on the coarsest approximation of each sample. When a
//! node's learner finishes its schedule, its codebook is frozen and every
//! frozen codevector gets a child learner responsible for that codevector's
//! cell, one resolution level finer. Samples descend by nearest frozen
//! codevector, so the leaves always partition the input space.
//!
//! A fresh child first gathers a few samples of its own cell to estimate the
//! local scale and class set before it starts annealing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{ClassId, FeatureShape, RunningStats, SampleStream};
use crate::error::{OdaError, Result};
use crate::metrics::Model;
use crate::oda::{self, init_state, AnnealParams, AnnealState, ParamOverrides, Supervision, WARMUP_SAMPLES};
use crate::par::Exec;
use crate::wavelet::{resolution_stack, upsample_once, ResolutionPyramid};

/// How samples are turned into per-depth inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Haar approximations: depth `d` sees level `max(levels - d, 0)`.
    #[default]
    Haar,
    /// Every depth sees the raw sample.
    Identity,
}

/// Shape and schedule settings of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Deepest node depth; also the pyramid depth, so the root consumes level `max_depth`.
    pub max_depth: usize,
    /// Train at most this many layers (depths `0..layers`); `None` allows `max_depth + 1`.
    pub layers: Option<usize>,
    pub representation: Representation,
    /// Parameter overrides shared by every node.
    pub params: ParamOverrides,
    /// Per-depth overrides, taking precedence over `params`.
    pub depth_params: Vec<ParamOverrides>,
    /// Samples a new node gathers before it starts annealing.
    pub node_warmup: usize,
    /// A class joins a child's codebook only if it makes up at least this
    /// share of the child's warm-up samples.
    pub min_class_share: f64,
    /// Root starting point at the root's resolution; defaults to the first sample.
    pub initial_point: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 1,
            layers: None,
            representation: Representation::Haar,
            params: ParamOverrides::default(),
            depth_params: Vec::new(),
            node_warmup: WARMUP_SAMPLES,
            min_class_share: 0.05,
            initial_point: None,
            seed: 0,
        }
    }
}

impl TreeConfig {
    /// Largest depth at which nodes are created.
    pub fn depth_limit(&self) -> usize {
        match self.layers {
            Some(l) => self.max_depth.min(l.saturating_sub(1)),
            None => self.max_depth,
        }
    }

    pub fn overrides_for(&self, depth: usize) -> ParamOverrides {
        match self.depth_params.get(depth) {
            Some(o) => o.or(&self.params),
            None => self.params.clone(),
        }
    }

    pub fn resolution_for(&self, depth: usize) -> usize {
        self.max_depth.saturating_sub(depth)
    }

    fn validate(&self) -> Result<()> {
        if self.node_warmup == 0 {
            return Err(OdaError::usage("node_warmup must be positive"));
        }
        if self.layers == Some(0) {
            return Err(OdaError::usage("layers must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.min_class_share) {
            return Err(OdaError::usage("min_class_share must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Learner held by a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    /// Collecting local statistics before annealing starts.
    Warming { stats: RunningStats },
    Live(Box<AnnealState>),
    /// Codebook fixed; routes samples to the children.
    Frozen(Box<AnnealState>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Warming,
    Annealing,
    /// Schedule completed, no further split allowed.
    Finished,
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    /// Index of the parent codevector whose cell this node refines.
    pub parent_codevector: Option<usize>,
    pub resolution_index: usize,
    /// Shape of the representation this node consumes.
    pub shape: FeatureShape,
    /// One child per frozen codevector, in codebook order.
    pub children: Vec<usize>,
    pub sample_count: u64,
    pub class_counts: BTreeMap<ClassId, u64>,
    /// Where the node's codevectors start.
    pub initial_point: Option<Vec<f64>>,
    pub state: NodeState,
}

impl TreeNode {
    pub fn status(&self) -> NodeStatus {
        match &self.state {
            NodeState::Warming { .. } => NodeStatus::Warming,
            NodeState::Live(s) if s.is_finished() => NodeStatus::Finished,
            NodeState::Live(_) => NodeStatus::Annealing,
            NodeState::Frozen(_) => NodeStatus::Frozen,
        }
    }

    /// The node's learner, live or frozen.
    pub fn learner(&self) -> Option<&AnnealState> {
        match &self.state {
            NodeState::Warming { .. } => None,
            NodeState::Live(s) | NodeState::Frozen(s) => Some(s),
        }
    }

    pub fn k(&self) -> usize {
        self.learner().map_or(0, AnnealState::k)
    }

    fn absorb(&mut self, x: &[f64], label: Option<ClassId>, ctx: &NodeContext<'_>) -> Result<()> {
        self.sample_count += 1;
        if let Some(l) = label {
            *self.class_counts.entry(l).or_insert(0) += 1;
        }
        match &mut self.state {
            NodeState::Warming { stats } => {
                stats.push(x);
                if self.initial_point.is_none() {
                    self.initial_point = Some(x.to_vec());
                }
                if stats.count() >= ctx.config.node_warmup as u64 {
                    self.activate(ctx)?;
                }
            }
            NodeState::Live(s) => {
                s.observe(x, label)?;
            }
            NodeState::Frozen(_) => {
                return Err(OdaError::Invariant(format!("sample delivered to frozen node {}", self.id)));
            }
        }
        Ok(())
    }

    fn activate(&mut self, ctx: &NodeContext<'_>) -> Result<()> {
        let NodeState::Warming { stats } = &self.state else {
            return Ok(());
        };
        let mut overrides = ctx.config.overrides_for(self.depth);
        let base_seed = overrides.seed.unwrap_or(ctx.config.seed);
        overrides.seed = Some(if self.id == 0 {
            base_seed
        } else {
            oda::mix_seed(base_seed, self.id as u64)
        });
        let anchor = match self.parent {
            None => ctx.config.initial_point.as_deref(),
            Some(_) => None,
        };
        let params = AnnealParams::from_stats_anchored(stats, &overrides, anchor)?;
        let supervision = if ctx.supervised {
            let total: u64 = self.class_counts.values().sum();
            let share = if self.parent.is_some() { ctx.config.min_class_share } else { 0.0 };
            let floor = (share * total as f64).ceil().max(1.0) as u64;
            let mut classes: Vec<ClassId> = self
                .class_counts
                .iter()
                .filter(|(_, &n)| n >= floor)
                .map(|(&c, _)| c)
                .collect();
            if classes.is_empty() {
                let top = self.class_counts.iter().max_by_key(|(_, &n)| n).map(|(&c, _)| c);
                classes.extend(top);
            }
            Supervision::Labels(classes)
        } else {
            Supervision::Unsupervised
        };
        let start = self
            .initial_point
            .clone()
            .ok_or_else(|| OdaError::Invariant("activating a node without samples".into()))?;
        let mut state = init_state(params, supervision, &start)?;
        state.stats = stats.clone();
        self.state = NodeState::Live(Box::new(state));
        Ok(())
    }
}

struct NodeContext<'a> {
    config: &'a TreeConfig,
    supervised: bool,
}

/// Snapshot of a tree's shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    /// Codevectors that can answer a query: live codebooks plus the parent
    /// codevector standing in for each still-warming child.
    pub leaf_codevectors: usize,
    /// Codevectors over all nodes, frozen included.
    pub total_codevectors: usize,
    pub max_depth: usize,
    pub leaves: usize,
    pub nodes: Vec<NodeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub id: usize,
    pub depth: usize,
    pub resolution_index: usize,
    pub k: usize,
    pub sample_count: u64,
    pub status: NodeStatus,
    pub temperature: Option<f64>,
}

/// Tree of annealing learners; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdaTree {
    pub config: TreeConfig,
    /// Shape of raw input samples.
    pub input_shape: FeatureShape,
    pub supervised: bool,
    pub nodes: Vec<TreeNode>,
    pub samples_seen: u64,
    /// Divergence evaluations spent routing training samples.
    pub routing_evals: u64,
}

impl OdaTree {
    pub fn new(config: TreeConfig, input_shape: FeatureShape, supervised: bool) -> Result<Self> {
        config.validate()?;
        let mut tree = Self {
            config,
            input_shape,
            supervised,
            nodes: Vec::new(),
            samples_seen: 0,
            routing_evals: 0,
        };
        let probe = tree.pyramid(&vec![0.0; input_shape.len()])?;
        let res = tree.config.resolution_for(0);
        if let Some(p) = &tree.config.initial_point {
            if p.len() != probe.shape_at_level(res).len() {
                return Err(OdaError::usage("initial point does not match the root resolution"));
            }
        }
        tree.nodes.push(TreeNode {
            id: 0,
            depth: 0,
            parent: None,
            parent_codevector: None,
            resolution_index: res,
            shape: probe.shape_at_level(res),
            children: Vec::new(),
            sample_count: 0,
            class_counts: BTreeMap::new(),
            initial_point: tree.config.initial_point.clone(),
            state: NodeState::Warming {
                stats: RunningStats::new(probe.shape_at_level(res).len()),
            },
        });
        Ok(tree)
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// The per-depth inputs of one raw sample.
    pub fn pyramid(&self, sample: &[f64]) -> Result<ResolutionPyramid> {
        match self.config.representation {
            Representation::Haar => resolution_stack(sample, self.input_shape, self.config.max_depth),
            Representation::Identity => {
                if sample.len() != self.input_shape.len() {
                    return Err(OdaError::usage("sample does not match the tree's input shape"));
                }
                let n = self.config.max_depth + 1;
                Ok(ResolutionPyramid {
                    levels: vec![sample.to_vec(); n],
                    shapes: vec![self.input_shape; n],
                })
            }
        }
    }

    fn descend(&self, pyramid: &ResolutionPyramid, evals: &mut u64) -> Vec<usize> {
        let mut path = vec![0];
        let mut id = 0;
        while let NodeState::Frozen(s) = &self.nodes[id].state {
            let x = pyramid.at_level(self.nodes[id].resolution_index);
            let i = oda::nearest(x, &s.codebook, s.params.divergence).expect("frozen codebooks are non-empty");
            *evals += s.k() as u64;
            id = self.nodes[id].children[i];
            path.push(id);
        }
        path
    }

    /// Node ids from the root to the first non-frozen node reached by `pyramid`.
    pub fn route(&self, pyramid: &ResolutionPyramid) -> Result<Vec<usize>> {
        if pyramid.depth() < self.config.max_depth {
            return Err(OdaError::usage("pyramid is shallower than the tree"));
        }
        Ok(self.descend(pyramid, &mut 0))
    }

    /// Routes a raw sample.
    pub fn route_sample(&self, sample: &[f64]) -> Result<Vec<usize>> {
        self.route(&self.pyramid(sample)?)
    }

    /// Routes, updates and possibly splits for one raw sample.
    pub fn update_online(&mut self, sample: &[f64], label: Option<ClassId>) -> Result<()> {
        let p = self.pyramid(sample)?;
        self.train_batch(&[(p, label)], Exec::Sequential)
    }

    /// Processes a batch: routing against the tree as it stands, then one
    /// in-order pass per receiving node (nodes in parallel), then splits.
    ///
    /// The result does not depend on the execution strategy.
    pub fn train_batch(&mut self, batch: &[(ResolutionPyramid, Option<ClassId>)], exec: Exec) -> Result<()> {
        if batch.iter().any(|(p, _)| p.depth() < self.config.max_depth) {
            return Err(OdaError::usage("pyramid is shallower than the tree"));
        }
        let routed = exec.map(batch, |(p, _)| {
            let mut evals = 0;
            let leaf = *self.descend(p, &mut evals).last().expect("path starts at the root");
            (leaf, evals)
        });
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (i, &(leaf, evals)) in routed.iter().enumerate() {
            groups[leaf].push(i);
            self.routing_evals += evals;
        }
        self.samples_seen += batch.len() as u64;
        let ctx = NodeContext {
            config: &self.config,
            supervised: self.supervised,
        };
        let outcomes = exec.zip_mut(&mut self.nodes, &groups, |node, group| {
            for &i in group {
                let (p, label) = &batch[i];
                node.absorb(p.at_level(node.resolution_index), *label, &ctx)?;
            }
            Ok(())
        });
        outcomes.into_iter().collect::<Result<Vec<()>>>()?;
        let ready: Vec<usize> = (0..self.nodes.len())
            .filter(|&id| !groups[id].is_empty() && self.can_split(id))
            .collect();
        for id in ready {
            self.vertical_split(id)?;
        }
        Ok(())
    }

    fn can_split(&self, id: usize) -> bool {
        let node = &self.nodes[id];
        node.status() == NodeStatus::Finished && node.depth < self.config.depth_limit()
    }

    /// Freezes node `id` and creates one child per codevector.
    pub fn vertical_split(&mut self, id: usize) -> Result<()> {
        let node = self
            .nodes
            .get(id)
            .ok_or_else(|| OdaError::usage(format!("no node {id}")))?;
        let state = match &node.state {
            NodeState::Live(s) if s.is_finished() => s.clone(),
            NodeState::Live(_) => return Err(OdaError::usage("node has not finished annealing")),
            NodeState::Warming { .. } => return Err(OdaError::usage("node has not started annealing")),
            NodeState::Frozen(_) => return Err(OdaError::usage("node is already frozen")),
        };
        if node.depth >= self.config.depth_limit() {
            return Err(OdaError::usage("node is at the depth limit"));
        }
        let depth = node.depth + 1;
        let parent_shape = node.shape;
        let parent_res = node.resolution_index;
        let res = self.config.resolution_for(depth);
        let mut children = Vec::with_capacity(state.k());
        for (i, cv) in state.codebook.iter().enumerate() {
            let refine = res < parent_res && self.config.representation == Representation::Haar;
            let (start, shape) = if refine {
                upsample_once(&cv.weights, parent_shape)
            } else {
                (cv.weights.clone(), parent_shape)
            };
            let child = self.nodes.len();
            children.push(child);
            self.nodes.push(TreeNode {
                id: child,
                depth,
                parent: Some(id),
                parent_codevector: Some(i),
                resolution_index: res,
                shape,
                children: Vec::new(),
                sample_count: 0,
                class_counts: BTreeMap::new(),
                initial_point: Some(start),
                state: NodeState::Warming {
                    stats: RunningStats::new(shape.len()),
                },
            });
        }
        let node = &mut self.nodes[id];
        node.children = children;
        node.state = NodeState::Frozen(state);
        Ok(())
    }

    /// True once no node can make further progress.
    pub fn is_complete(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| matches!(n.status(), NodeStatus::Frozen | NodeStatus::Finished))
    }

    /// Trains from `stream` until complete, the stream ends, or `max_samples` are used.
    pub fn train(&mut self, stream: &mut SampleStream<'_>, max_samples: u64, batch_size: usize, exec: Exec) -> Result<()> {
        let batch_size = batch_size.max(1);
        let mut used = 0u64;
        while !self.is_complete() && used < max_samples {
            let take = batch_size.min((max_samples - used) as usize);
            let raw: Vec<(&[f64], Option<ClassId>)> = stream.by_ref().take(take).map(|o| (o.x, o.label)).collect();
            if raw.is_empty() {
                break;
            }
            used += raw.len() as u64;
            let batch = exec
                .map(&raw, |&(x, l)| self.pyramid(x).map(|p| (p, l)))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            self.train_batch(&batch, exec)?;
        }
        Ok(())
    }

    /// Class of the nearest codevector at the terminal node, descending no deeper than `max_layer`.
    pub fn predict_layer(&self, sample: &[f64], max_layer: usize) -> Result<ClassId> {
        let p = self.pyramid(sample)?;
        self.terminal(&p, max_layer, &mut 0).map(|t| t.label)
    }

    fn terminal(&self, pyramid: &ResolutionPyramid, max_layer: usize, evals: &mut u64) -> Result<Terminal> {
        let mut id = 0;
        let mut fallback: Option<Terminal> = None;
        loop {
            let node = &self.nodes[id];
            let x = pyramid.at_level(node.resolution_index);
            let learner = match &node.state {
                NodeState::Warming { .. } => {
                    return fallback.ok_or_else(|| OdaError::usage("the tree has not been trained"));
                }
                NodeState::Live(s) | NodeState::Frozen(s) => s,
            };
            let i = learner.assign(x)?;
            *evals += learner.k() as u64;
            let here = Terminal {
                node: id,
                codevector: i,
                label: learner.codebook[i].label,
            };
            match &node.state {
                NodeState::Frozen(_) if node.depth < max_layer => {
                    fallback = Some(here);
                    id = node.children[i];
                }
                _ => return Ok(here),
            }
        }
    }

    pub fn predict(&self, sample: &[f64]) -> Result<ClassId> {
        self.predict_layer(sample, usize::MAX)
    }

    pub fn stats(&self) -> TreeStats {
        let nodes: Vec<NodeStats> = self
            .nodes
            .iter()
            .map(|n| NodeStats {
                id: n.id,
                depth: n.depth,
                resolution_index: n.resolution_index,
                k: n.k(),
                sample_count: n.sample_count,
                status: n.status(),
                temperature: n.learner().map(|s| s.temperature),
            })
            .collect();
        let leaf_codevectors = self
            .nodes
            .iter()
            .map(|n| match n.status() {
                NodeStatus::Frozen => 0,
                NodeStatus::Warming => n.parent.is_some() as usize,
                _ => n.k(),
            })
            .sum();
        TreeStats {
            leaf_codevectors,
            total_codevectors: nodes.iter().map(|n| n.k).sum(),
            max_depth: nodes.iter().map(|n| n.depth).max().unwrap_or(0),
            leaves: nodes.iter().filter(|n| n.status != NodeStatus::Frozen).count(),
            nodes,
        }
    }

    /// Codevectors held by nodes at `depth`.
    pub fn layer_codevectors(&self, depth: usize) -> usize {
        self.nodes.iter().filter(|n| n.depth == depth).map(TreeNode::k).sum()
    }

    /// Divergence evaluations spent in training: routing plus node updates.
    pub fn divergence_evals(&self) -> u64 {
        self.routing_evals
            + self
                .nodes
                .iter()
                .filter_map(|n| n.learner())
                .map(|s| s.divergence_evals)
                .sum::<u64>()
    }
}

/// Predicted class of a raw sample.
pub fn tree_predict(tree: &OdaTree, sample: &[f64]) -> Result<ClassId> {
    tree.predict(sample)
}

pub fn tree_stats(tree: &OdaTree) -> TreeStats {
    tree.stats()
}

struct Terminal {
    node: usize,
    codevector: usize,
    label: ClassId,
}

impl Model for OdaTree {
    fn predict(&self, x: &[f64]) -> Result<ClassId> {
        OdaTree::predict(self, x)
    }

    fn predict_counted(&self, x: &[f64], evals: &mut u64) -> Result<ClassId> {
        let p = self.pyramid(x)?;
        self.terminal(&p, usize::MAX, evals).map(|t| t.label)
    }

    fn quantization_error(&self, x: &[f64]) -> Result<f64> {
        let p = self.pyramid(x)?;
        let t = self.terminal(&p, usize::MAX, &mut 0)?;
        let node = &self.nodes[t.node];
        let s = node.learner().expect("terminal nodes hold a learner");
        Ok(s.params.divergence.eval(p.at_level(node.resolution_index), &s.codebook[t.codevector].weights))
    }

    fn association(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.pyramid(x)?;
        let t = self.terminal(&p, usize::MAX, &mut 0)?;
        let node = &self.nodes[t.node];
        let s = node.learner().expect("terminal nodes hold a learner");
        s.association(p.at_level(node.resolution_index))
    }

    /// Highest temperature among the leaf learners.
    fn temperature(&self) -> f64 {
        self.nodes
            .iter()
            .filter(|n| matches!(n.state, NodeState::Live(_)))
            .filter_map(|n| n.learner().map(|s| s.temperature))
            .fold(0.0, f64::max)
    }

    fn codevector_count(&self) -> usize {
        self.stats().leaf_codevectors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oda::Codevector;

    fn frozen_root_1d() -> OdaTree {
        let config = TreeConfig {
            max_depth: 1,
            representation: Representation::Identity,
            ..Default::default()
        };
        let mut tree = OdaTree::new(config, FeatureShape::Vector(1), true).unwrap();
        let mut stats = RunningStats::new(1);
        stats.push(&[-1.0]);
        stats.push(&[1.0]);
        let params = ParamOverrides::default().resolve(&stats).unwrap();
        let mut s = init_state(params, Supervision::Labels(vec![0, 1]), &[0.0]).unwrap();
        s.codebook = vec![Codevector::new(vec![-1.0], 0, 0.5), Codevector::new(vec![1.0], 1, 0.5)];
        s.phase = oda::Phase::Finished;
        tree.nodes[0].state = NodeState::Live(Box::new(s));
        tree.vertical_split(0).unwrap();
        tree
    }

    #[test]
    fn fresh_tree_routes_to_root() {
        let tree = OdaTree::new(TreeConfig::default(), FeatureShape::Vector(4), false).unwrap();
        assert_eq!(tree.route_sample(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0]);
        let st = tree.stats();
        assert_eq!((st.leaf_codevectors, st.max_depth), (0, 0));
        assert!(matches!(tree.predict(&[0.0; 4]), Err(OdaError::Usage(_))));
    }

    #[test]
    fn nearest_cell_routing() {
        let mut tree = frozen_root_1d();
        assert_eq!(tree.route_sample(&[-0.3]).unwrap(), vec![0, 1]);
        assert_eq!(tree.route_sample(&[0.3]).unwrap(), vec![0, 2]);
        // equidistant: lowest index wins
        assert_eq!(tree.route_sample(&[0.0]).unwrap(), vec![0, 1]);
        let st = tree.stats();
        assert_eq!((st.leaves, st.max_depth, st.leaf_codevectors), (2, 1, 2));
        // warming children answer with their parent codevector
        assert_eq!(tree.predict(&[0.7]).unwrap(), 1);
        assert!(matches!(tree.vertical_split(0), Err(OdaError::Usage(_))));
    }

    #[test]
    fn children_start_from_upsampled_parent() {
        let config = TreeConfig {
            max_depth: 1,
            ..Default::default()
        };
        let mut tree = OdaTree::new(config, FeatureShape::Vector(4), false).unwrap();
        assert_eq!(tree.root().shape, FeatureShape::Vector(2));
        let mut stats = RunningStats::new(2);
        stats.push(&[0.0, 0.0]);
        stats.push(&[1.0, 1.0]);
        let params = ParamOverrides::default().resolve(&stats).unwrap();
        let mut s = init_state(params, Supervision::Unsupervised, &[2.0, 4.0]).unwrap();
        s.phase = oda::Phase::Finished;
        tree.nodes[0].state = NodeState::Live(Box::new(s));
        tree.vertical_split(0).unwrap();
        let child = &tree.nodes[1];
        assert_eq!((child.depth, child.resolution_index), (1, 0));
        assert_eq!(child.shape, FeatureShape::Vector(4));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [2.0 * r, 2.0 * r, 4.0 * r, 4.0 * r];
        for (a, b) in child.initial_point.as_ref().unwrap().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn warming_child_activates_with_local_classes() {
        let mut tree = frozen_root_1d();
        tree.config.node_warmup = 5;
        for i in 0..5 {
            tree.update_online(&[-1.0 - 0.1 * i as f64], Some(0)).unwrap();
        }
        let child = &tree.nodes[1];
        let s = child.learner().expect("activated");
        assert_eq!(s.classes, vec![0]);
        assert_eq!(child.sample_count, 5);
        assert_eq!(tree.nodes[2].sample_count, 0);
    }

    #[test]
    fn depth_limit_respects_layers() {
        let c = TreeConfig {
            max_depth: 2,
            layers: Some(2),
            ..Default::default()
        };
        assert_eq!(c.depth_limit(), 1);
        assert_eq!(c.resolution_for(0), 2);
        assert_eq!(c.resolution_for(5), 0);
        let c = TreeConfig {
            max_depth: 2,
            ..Default::default()
        };
        assert_eq!(c.depth_limit(), 2);
    }
}
