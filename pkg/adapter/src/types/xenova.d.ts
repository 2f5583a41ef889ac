// Shorthand ambient declaration so the package type-checks when the
// optional inference dependency is not installed (its install needs
// network access for native binaries).
declare module "@xenova/transformers";
