# Time-scale calculus, reporting and plotting helpers