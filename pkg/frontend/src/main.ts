import { ViewerApp } from './app.js';

const root = document.getElementById('app');
if (root) new ViewerApp(root);
