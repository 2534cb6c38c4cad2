//! Nullity stratifications, null foliations and derived-bracket
//! L∞[1] structures of closed 2-forms, computed exactly where possible.

pub mod skewcore;
pub mod symfield;
pub mod stratify;
pub mod foliation;
pub mod linf;
pub mod moser;
pub mod io_cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/strata.md")]
    mod strata {}
    #[doc = include_str!("../../../book/src/stratification.md")]
    mod stratification {}
    #[doc = include_str!("../../../book/src/foliations.md")]
    mod foliations {}
    #[doc = include_str!("../../../book/src/brackets.md")]
    mod brackets {}
    #[doc = include_str!("../../../book/src/moser.md")]
    mod moser {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
