//! The book chapters, included as module docs so `cargo test` compiles and
//! runs every snippet in them.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub mod $name {}
    };
}

chapter!(introduction, "introduction.md");
chapter!(benchmarks, "benchmarks.md");
chapter!(decomposition, "decomposition.md");
chapter!(surrogates, "surrogates.md");
chapter!(pr_search, "pr-search.md");
chapter!(shade, "shade.md");
chapter!(rbf_shade, "rbf-shade.md");
chapter!(cooperative_coevolution, "cooperative-coevolution.md");
chapter!(experiments, "experiments.md");
