use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ContextError, DimensionName, SimpleContext, TagValue};

/// Owned, nested form of a context tree. This is what literals and the
/// serialized form describe; [`ContextTree`] adds parent links.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TreeNode {
    #[serde(default)]
    pub children: BTreeMap<DimensionName, Child>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<TagValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Child {
    Leaf(TagValue),
    Node(TreeNode),
}

impl TreeNode {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_default(mut self, tag: impl Into<TagValue>) -> Self {
        self.default = Some(tag.into());
        self
    }

    pub fn leaf(mut self, d: &str, tag: impl Into<TagValue>) -> Self {
        self.children.insert(super::dim(d), Child::Leaf(tag.into()));
        self
    }

    pub fn node(mut self, d: &str, sub: TreeNode) -> Self {
        self.children.insert(super::dim(d), Child::Node(sub));
        self
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .values()
            .filter_map(|c| match c {
                Child::Node(n) => Some(n.depth()),
                Child::Leaf(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// The context visible at this node: leaves contribute their tag,
    /// subtrees contribute their default when they have one.
    pub fn effective_context(&self) -> SimpleContext {
        self.children
            .iter()
            .filter_map(|(d, c)| match c {
                Child::Leaf(t) => Some((d.clone(), t.clone())),
                Child::Node(n) => n.default.clone().map(|t| (d.clone(), t)),
            })
            .collect()
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (d, c)) in self.children.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}:")?;
            match c {
                Child::Leaf(t) => write!(f, "{t}")?,
                Child::Node(n) => {
                    if let Some(t) = &n.default {
                        write!(f, "{t} ")?;
                    }
                    write!(f, "{n}")?;
                }
            }
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
struct Slot {
    default: Option<TagValue>,
    leaves: BTreeMap<DimensionName, TagValue>,
    subtrees: BTreeMap<DimensionName, NodeId>,
    parent: Option<(NodeId, DimensionName)>,
}

/// A hierarchical context with parent links, stored as an arena.
#[derive(Debug, Clone)]
pub struct ContextTree {
    slots: Vec<Slot>,
}

impl ContextTree {
    pub fn new(root: &TreeNode) -> Self {
        let mut tree = ContextTree { slots: Vec::new() };
        tree.add(root, None);
        tree
    }

    fn add(&mut self, node: &TreeNode, parent: Option<(NodeId, DimensionName)>) -> NodeId {
        let id = NodeId(self.slots.len());
        self.slots.push(Slot {
            default: node.default.clone(),
            leaves: BTreeMap::new(),
            subtrees: BTreeMap::new(),
            parent,
        });
        for (d, child) in &node.children {
            match child {
                Child::Leaf(t) => {
                    self.slots[id.0].leaves.insert(d.clone(), t.clone());
                }
                Child::Node(sub) => {
                    let sid = self.add(sub, Some((id, d.clone())));
                    self.slots[id.0].subtrees.insert(d.clone(), sid);
                }
            }
        }
        id
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node_count(&self) -> usize {
        self.slots.len()
    }

    pub fn parent(&self, id: NodeId) -> Option<(NodeId, &DimensionName)> {
        self.slots[id.0].parent.as_ref().map(|(p, d)| (*p, d))
    }

    pub fn subtree(&self, id: NodeId, d: &DimensionName) -> Option<NodeId> {
        self.slots[id.0].subtrees.get(d).copied()
    }

    pub fn default_at(&self, id: NodeId) -> Option<&TagValue> {
        self.slots[id.0].default.as_ref()
    }

    /// Rebuilds the nested form of the subtree rooted at `id`.
    pub fn to_node(&self, id: NodeId) -> TreeNode {
        let slot = &self.slots[id.0];
        let mut children: BTreeMap<_, _> = slot
            .leaves
            .iter()
            .map(|(d, t)| (d.clone(), Child::Leaf(t.clone())))
            .collect();
        for (d, sid) in &slot.subtrees {
            children.insert(d.clone(), Child::Node(self.to_node(*sid)));
        }
        TreeNode {
            children,
            default: slot.default.clone(),
        }
    }

    pub fn effective_context(&self, id: NodeId) -> SimpleContext {
        let slot = &self.slots[id.0];
        let mut out: SimpleContext = slot
            .leaves
            .iter()
            .map(|(d, t)| (d.clone(), t.clone()))
            .collect();
        for (d, sid) in &slot.subtrees {
            if let Some(t) = &self.slots[sid.0].default {
                out.insert(d.clone(), t.clone());
            }
        }
        out
    }

    /// Checks that every child records its parent under the dimension it
    /// hangs from, and that every non-root node is reachable exactly once.
    pub fn is_consistent(&self) -> bool {
        let mut seen = vec![false; self.slots.len()];
        seen[0] = self.slots[0].parent.is_none();
        for (i, slot) in self.slots.iter().enumerate() {
            for (d, sid) in &slot.subtrees {
                match &self.slots[sid.0].parent {
                    Some((p, pd)) if p.0 == i && pd == d && !seen[sid.0] => seen[sid.0] = true,
                    _ => return false,
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl From<TreeNode> for ContextTree {
    fn from(node: TreeNode) -> Self {
        ContextTree::new(&node)
    }
}

impl PartialEq for ContextTree {
    fn eq(&self, other: &Self) -> bool {
        self.to_node(self.root()) == other.to_node(other.root())
    }
}

impl Eq for ContextTree {}

impl Serialize for ContextTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_node(self.root()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ContextTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        TreeNode::deserialize(d).map(ContextTree::from)
    }
}

impl fmt::Display for ContextTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_node(self.root()))
    }
}

/// A position inside a shared [`ContextTree`].
#[derive(Debug, Clone)]
pub struct ContextCursor {
    tree: Arc<ContextTree>,
    node: NodeId,
    path: Vec<DimensionName>,
}

impl ContextCursor {
    pub fn root(tree: Arc<ContextTree>) -> Self {
        let node = tree.root();
        ContextCursor {
            tree,
            node,
            path: Vec::new(),
        }
    }

    /// Resolves a path from the root.
    pub fn at_path(tree: Arc<ContextTree>, path: &[DimensionName]) -> Result<Self, ContextError> {
        path.iter()
            .try_fold(ContextCursor::root(tree), |cur, d| cur.descend(d))
    }

    pub fn tree(&self) -> &Arc<ContextTree> {
        &self.tree
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn path(&self) -> &[DimensionName] {
        &self.path
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    pub fn descend(&self, d: &DimensionName) -> Result<Self, ContextError> {
        let node = self
            .tree
            .subtree(self.node, d)
            .ok_or_else(|| ContextError::NoSuchChild(d.clone()))?;
        let mut path = self.path.clone();
        path.push(d.clone());
        Ok(ContextCursor {
            tree: Arc::clone(&self.tree),
            node,
            path,
        })
    }

    pub fn ascend(&self) -> Result<Self, ContextError> {
        let (parent, d) = self.tree.parent(self.node).ok_or(ContextError::AtRoot)?;
        let mut path = self.path.clone();
        match path.pop() {
            Some(last) if &last == d => {}
            _ => return Err(ContextError::DanglingPath),
        }
        Ok(ContextCursor {
            tree: Arc::clone(&self.tree),
            node: parent,
            path,
        })
    }

    pub fn effective_context(&self) -> SimpleContext {
        self.tree.effective_context(self.node)
    }

    /// Tag of `d` as seen from this node.
    pub fn lookup(&self, d: &DimensionName) -> Option<TagValue> {
        self.effective_context().get(d).cloned()
    }
}

impl PartialEq for ContextCursor {
    fn eq(&self, other: &Self) -> bool {
        self.path == other.path && (Arc::ptr_eq(&self.tree, &other.tree) || self.tree == other.tree)
    }
}

impl Eq for ContextCursor {}
