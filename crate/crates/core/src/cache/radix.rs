//! Token radix tree with LRU trimming.
//!
//! Every edge carries a run of tokens and the time its child node was last on
//! a request path. A parent is always at least as recent as its children, so
//! the least recent token in the tree is the tail of the least recent leaf.
//! Eviction trims leaves from their tail, oldest first.

use std::collections::{BTreeSet, HashMap};

type NodeId = usize;
const ROOT: NodeId = 0;

#[derive(Debug)]
struct Node {
    parent: NodeId,
    /// Tokens on the edge from `parent` to this node.
    edge: Vec<u32>,
    children: HashMap<u32, NodeId>,
    last_access: u64,
    live: bool,
}

#[derive(Debug)]
pub struct RadixTree {
    nodes: Vec<Node>,
    free: Vec<NodeId>,
    /// `(last_access, node)` for every live leaf except the root.
    leaves: BTreeSet<(u64, NodeId)>,
    size: usize,
    clock: u64,
    evicted_tokens: u64,
}

impl Default for RadixTree {
    fn default() -> Self {
        Self::new()
    }
}

impl RadixTree {
    pub fn new() -> Self {
        RadixTree {
            nodes: vec![Node {
                parent: ROOT,
                edge: Vec::new(),
                children: HashMap::new(),
                last_access: 0,
                live: true,
            }],
            free: Vec::new(),
            leaves: BTreeSet::new(),
            size: 0,
            clock: 0,
            evicted_tokens: 0,
        }
    }

    /// Tokens currently stored.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn evicted_tokens(&self) -> u64 {
        self.evicted_tokens
    }

    /// Length of the longest stored prefix of `tokens`. Does not touch
    /// access times.
    pub fn match_prefix(&self, tokens: &[u32]) -> usize {
        let mut node = ROOT;
        let mut pos = 0;
        while pos < tokens.len() {
            let Some(&child) = self.nodes[node].children.get(&tokens[pos]) else {
                break;
            };
            let edge = &self.nodes[child].edge;
            let common = edge.iter().zip(&tokens[pos..]).take_while(|(a, b)| a == b).count();
            pos += common;
            if common < edge.len() {
                break;
            }
            node = child;
        }
        pos
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id] = node;
                id
            }
            None => {
                self.nodes.push(node);
                self.nodes.len() - 1
            }
        }
    }

    fn is_leaf(&self, id: NodeId) -> bool {
        id != ROOT && self.nodes[id].children.is_empty()
    }

    fn touch(&mut self, id: NodeId, now: u64) {
        let leaf = self.is_leaf(id);
        if leaf {
            self.leaves.remove(&(self.nodes[id].last_access, id));
        }
        self.nodes[id].last_access = now;
        if leaf {
            self.leaves.insert((now, id));
        }
    }

    /// Splits the edge into `child` after `at` tokens and returns the new
    /// intermediate node.
    fn split(&mut self, child: NodeId, at: usize) -> NodeId {
        let parent = self.nodes[child].parent;
        let tail = self.nodes[child].edge.split_off(at);
        let head = std::mem::replace(&mut self.nodes[child].edge, tail);
        let first_head = head[0];
        let first_tail = self.nodes[child].edge[0];
        let mid = self.alloc(Node {
            parent,
            edge: head,
            children: HashMap::from([(first_tail, child)]),
            last_access: self.nodes[child].last_access,
            live: true,
        });
        self.nodes[child].parent = mid;
        self.nodes[parent].children.insert(first_head, mid);
        mid
    }

    /// Walks and materializes the matched path of `tokens`, splitting a
    /// partially matched edge, and marks the path as accessed now.
    fn lock_path(&mut self, tokens: &[u32], now: u64) -> (NodeId, usize) {
        let mut node = ROOT;
        let mut pos = 0;
        while pos < tokens.len() {
            let Some(&child) = self.nodes[node].children.get(&tokens[pos]) else {
                break;
            };
            let common = self.nodes[child]
                .edge
                .iter()
                .zip(&tokens[pos..])
                .take_while(|(a, b)| a == b)
                .count();
            let next = if common < self.nodes[child].edge.len() { self.split(child, common) } else { child };
            self.touch(next, now);
            pos += common;
            node = next;
            if next != child {
                break;
            }
        }
        (node, pos)
    }

    /// Trims `need` tokens from the least recently used leaves, never
    /// touching nodes accessed at `now`. Returns tokens actually freed.
    fn evict(&mut self, mut need: usize, now: u64) -> usize {
        let mut freed = 0;
        while need > 0 {
            let Some(&(ts, leaf)) = self.leaves.first() else { break };
            if ts >= now {
                break;
            }
            let edge_len = self.nodes[leaf].edge.len();
            let cut = need.min(edge_len);
            if cut < edge_len {
                self.nodes[leaf].edge.truncate(edge_len - cut);
            } else {
                self.leaves.remove(&(ts, leaf));
                let parent = self.nodes[leaf].parent;
                let first = self.nodes[leaf].edge[0];
                self.nodes[parent].children.remove(&first);
                self.nodes[leaf].live = false;
                self.nodes[leaf].edge = Vec::new();
                self.free.push(leaf);
                if self.is_leaf(parent) {
                    self.leaves.insert((self.nodes[parent].last_access, parent));
                }
            }
            self.size -= cut;
            freed += cut;
            need -= cut;
        }
        self.evicted_tokens += freed as u64;
        freed
    }

    /// Matches `tokens`, then stores the unmatched tail, evicting older
    /// entries so the tree holds at most `capacity` tokens (`None` is
    /// unbounded). With `evict == false` a full tree stores only what fits.
    /// Returns `(matched, written)`.
    pub fn insert(&mut self, tokens: &[u32], capacity: Option<usize>, evict: bool) -> (usize, usize) {
        self.clock += 1;
        let now = self.clock;
        let (node, matched) = self.lock_path(tokens, now);
        let mut rest = &tokens[matched..];
        if let Some(cap) = capacity {
            let over = (self.size + rest.len()).saturating_sub(cap);
            if over > 0 && evict {
                self.evict(over, now);
            }
            let room = cap.saturating_sub(self.size);
            rest = &rest[..rest.len().min(room)];
        }
        if rest.is_empty() {
            return (matched, 0);
        }
        if self.is_leaf(node) {
            self.leaves.remove(&(self.nodes[node].last_access, node));
        }
        let leaf = self.alloc(Node {
            parent: node,
            edge: rest.to_vec(),
            children: HashMap::new(),
            last_access: now,
            live: true,
        });
        self.nodes[node].children.insert(rest[0], leaf);
        self.leaves.insert((now, leaf));
        self.size += rest.len();
        (matched, rest.len())
    }

    #[cfg(test)]
    fn check(&self) {
        let mut total = 0;
        for (id, n) in self.nodes.iter().enumerate() {
            if !n.live || id == ROOT {
                continue;
            }
            assert!(!n.edge.is_empty());
            total += n.edge.len();
            let p = &self.nodes[n.parent];
            assert!(p.live);
            assert_eq!(p.children.get(&n.edge[0]), Some(&id));
            assert!(n.parent == ROOT || p.last_access >= n.last_access);
            assert_eq!(self.leaves.contains(&(n.last_access, id)), n.children.is_empty());
        }
        assert_eq!(total, self.size);
    }
}
