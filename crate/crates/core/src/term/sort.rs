use std::fmt;
use std::sync::Arc;

/// A simple type over the single ground sort `o`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sort {
    Ground,
    Arrow(Arc<Sort>, Arc<Sort>),
}

impl Sort {
    pub fn arrow(argument: Sort, result: Sort) -> Sort {
        Sort::Arrow(Arc::new(argument), Arc::new(result))
    }

    /// `o -> o -> ... -> o` with `arity` arguments.
    pub fn first_order(arity: usize) -> Sort {
        (0..arity).fold(Sort::Ground, |acc, _| Sort::arrow(Sort::Ground, acc))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Sort::Ground)
    }

    pub fn order(&self) -> u32 {
        ord_sort(self)
    }

    pub fn split_arrow(&self) -> Option<(&Sort, &Sort)> {
        match self {
            Sort::Ground => None,
            Sort::Arrow(a, b) => Some((a, b)),
        }
    }
}

/// `ord(o) = 0`, `ord(a -> b) = max(1 + ord(a), ord(b))`.
pub fn ord_sort(sort: &Sort) -> u32 {
    match sort {
        Sort::Ground => 0,
        Sort::Arrow(a, b) => (1 + ord_sort(a)).max(ord_sort(b)),
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Ground => write!(f, "o"),
            Sort::Arrow(a, b) => {
                if a.is_ground() {
                    write!(f, "o -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(ord_sort(&Sort::Ground), 0);
        assert_eq!(ord_sort(&Sort::arrow(Sort::Ground, Sort::Ground)), 1);
        let second = Sort::arrow(Sort::arrow(Sort::Ground, Sort::Ground), Sort::Ground);
        assert_eq!(ord_sort(&second), 2);
        assert_eq!(ord_sort(&Sort::first_order(3)), 1);
    }

    #[test]
    fn display_is_right_associative() {
        let s = Sort::arrow(Sort::arrow(Sort::Ground, Sort::Ground), Sort::first_order(1));
        assert_eq!(s.to_string(), "(o -> o) -> o -> o");
    }
}
