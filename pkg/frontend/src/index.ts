export * from "./types";
export * from "./api";
export * from "./session";
export * from "./mapView";
export * from "./canvas";
export * from "./adviceEditor";
export * from "./equityDashboard";
