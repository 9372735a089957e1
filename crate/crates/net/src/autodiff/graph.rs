use ndarray::ArrayD;

/// Handle into a [`Graph`]'s tape. Cheap to copy; only meaningful for
/// the graph that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tensor(pub(crate) usize);

/// Context handed to an op's backward closure.
pub struct BackCtx<'a> {
    /// Forward values of the node's parents, in registration order.
    pub parents: Vec<&'a ArrayD<f64>>,
    /// The node's own forward value.
    pub value: &'a ArrayD<f64>,
    /// Incoming gradient with the node's shape.
    pub grad: &'a ArrayD<f64>,
    /// Which parents actually need a gradient; ops may skip the rest by
    /// returning `None` in that slot.
    pub needs: &'a [bool],
}

pub(crate) type BackFn = Box<dyn Fn(&BackCtx) -> Vec<Option<ArrayD<f64>>>>;

pub(crate) struct Node {
    pub value: ArrayD<f64>,
    pub parents: Vec<Tensor>,
    pub backward: Option<BackFn>,
    pub needs_grad: bool,
}

/// Eager tape: every op computes its value immediately and records how
/// to push gradients to its parents. Reverse-index iteration is a valid
/// topological order because parents always precede children.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn leaf(&mut self, value: ArrayD<f64>, needs_grad: bool) -> Tensor {
        let id = Tensor(self.nodes.len());
        self.nodes.push(Node {
            value,
            parents: Vec::new(),
            backward: None,
            needs_grad,
        });
        id
    }

    pub fn constant(&mut self, value: ArrayD<f64>) -> Tensor {
        self.leaf(value, false)
    }

    /// Copies a node's value into a fresh gradient-blocking leaf.
    pub fn detach(&mut self, t: Tensor) -> Tensor {
        let v = self.nodes[t.0].value.clone();
        self.leaf(v, false)
    }

    pub fn value(&self, t: Tensor) -> &ArrayD<f64> {
        &self.nodes[t.0].value
    }

    pub fn needs_grad(&self, t: Tensor) -> bool {
        self.nodes[t.0].needs_grad
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn push(
        &mut self,
        value: ArrayD<f64>,
        parents: Vec<Tensor>,
        backward: BackFn,
    ) -> Tensor {
        let needs_grad = parents.iter().any(|p| self.nodes[p.0].needs_grad);
        let id = Tensor(self.nodes.len());
        self.nodes.push(Node {
            value,
            parents,
            // a subgraph nothing differentiates through needs no tape
            backward: needs_grad.then_some(backward),
            needs_grad,
        });
        id
    }

    /// Reverse-mode sweep from `root` (seeded with ones, so a scalar
    /// root yields plain derivatives). Gradients of interior nodes are
    /// freed as soon as they have been propagated; leaves keep theirs.
    pub fn backward(&self, root: Tensor) -> Gradients {
        let mut grads: Vec<Option<ArrayD<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        if !self.nodes[root.0].needs_grad {
            return Gradients { grads };
        }
        grads[root.0] = Some(ArrayD::ones(self.nodes[root.0].value.raw_dim()));

        for id in (0..=root.0).rev() {
            let node = &self.nodes[id];
            let Some(backward) = node.backward.as_ref() else {
                continue;
            };
            if grads[id].is_none() {
                continue;
            }
            let grad = grads[id].take().unwrap();
            let needs: Vec<bool> = node
                .parents
                .iter()
                .map(|p| self.nodes[p.0].needs_grad)
                .collect();
            let ctx = BackCtx {
                parents: node.parents.iter().map(|p| &self.nodes[p.0].value).collect(),
                value: &node.value,
                grad: &grad,
                needs: &needs,
            };
            let parent_grads = backward(&ctx);
            debug_assert_eq!(parent_grads.len(), node.parents.len());
            for ((parent, pg), need) in node.parents.iter().zip(parent_grads).zip(needs) {
                if !need {
                    continue;
                }
                let pg = pg.expect("op failed to produce a needed parent gradient");
                debug_assert_eq!(
                    pg.shape(),
                    self.nodes[parent.0].value.shape(),
                    "gradient shape mismatch at node {id}"
                );
                match &mut grads[parent.0] {
                    Some(acc) => *acc += &pg,
                    slot => *slot = Some(pg),
                }
            }
        }
        Gradients { grads }
    }
}

/// Result of a backward sweep; holds gradients for leaves (and any
/// nodes that received but never propagated one).
pub struct Gradients {
    grads: Vec<Option<ArrayD<f64>>>,
}

impl Gradients {
    pub fn get(&self, t: Tensor) -> Option<&ArrayD<f64>> {
        self.grads.get(t.0).and_then(|g| g.as_ref())
    }
}
